//! Question answering over a knowledge base: context assembly, a
//! deterministic extractive answerer, a provider-backed answerer and the
//! brute-force table oracle used to define ground truth.

mod context;
mod extractive;
mod facets;
mod oracle;
mod pipeline;
mod provider;

pub use context::{assemble_context, AssembledContext, ContextBlock, DEFAULT_CONTEXT_CAP};
pub use extractive::{extractive_answer, ExtractiveAnswerer};
pub use facets::{expand_month_abbreviations, extract_facets, facet_mentions, Benefit, Mentions, Month, QueryFacets, Tier};
pub use oracle::{oracle_answer, oracle_cell};
pub use pipeline::{answer_pipeline, answer_pipeline_traced, Answerer, PipelineTrace, QaSettings, DEFAULT_K};
pub use provider::{parse_provider_reply, provider_answer, MockQaProvider, ProviderAnswerer, QaTemplate};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::IndexError;
use crate::linearize::ProviderError;
use crate::tablemodel::{CellRef, MoneyValue};

pub const NOT_FOUND_PHRASE: &str = "Sorry, I could not find relevant information to complete your request.";

#[derive(Debug, Error)]
pub enum QaError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("oracle needs month, tier and benefit; got {0:?}")]
    IncompleteFacets(QueryFacets),
    #[error("facets {facets:?} match {} cells: {cells:?}", cells.len())]
    AmbiguousFacets { facets: QueryFacets, cells: Vec<CellRef> },
    #[error("QA template: {0}")]
    Template(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub text: String,
    /// Supplied facets; extracted from `text` when absent.
    pub facets: Option<QueryFacets>,
}

impl Query {
    pub fn new(text: impl Into<String>) -> Query {
        Query { text: text.into(), facets: None }
    }

    pub fn with_facets(text: impl Into<String>, facets: QueryFacets) -> Query {
        Query { text: text.into(), facets: Some(facets) }
    }

    pub fn effective_facets(&self) -> QueryFacets {
        self.facets.unwrap_or_else(|| extract_facets(&self.text))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerStatus {
    Answered,
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    pub value: Option<MoneyValue>,
    /// Chunk ids.
    pub citations: Vec<String>,
    pub status: AnswerStatus,
}

impl Answer {
    pub fn not_found(phrase: &str) -> Answer {
        Answer { text: phrase.to_string(), value: None, citations: Vec::new(), status: AnswerStatus::NotFound }
    }

    pub fn is_not_found(&self) -> bool {
        self.status == AnswerStatus::NotFound
    }
}
