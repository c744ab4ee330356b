use serde::{Deserialize, Serialize};

use crate::index::{retrieve, Embedder, KnowledgeBase, Retrieval};

use super::{assemble_context, expand_month_abbreviations, Answer, AssembledContext, QaError, Query, DEFAULT_CONTEXT_CAP};

pub const DEFAULT_K: usize = 5;

/// Turns a query and its assembled context into an answer.
pub trait Answerer: Send + Sync {
    /// Short identifier used in reports and fingerprints.
    fn id(&self) -> String;

    fn answer(&self, q: &Query, ctx: &AssembledContext) -> Result<Answer, QaError>;

    /// Largest number of `answer` calls that may run at once.
    fn max_in_flight(&self) -> usize {
        usize::MAX
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaSettings {
    pub k: usize,
    pub context_cap: usize,
}

impl Default for QaSettings {
    fn default() -> Self {
        QaSettings { k: DEFAULT_K, context_cap: DEFAULT_CONTEXT_CAP }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineTrace {
    pub retrieval: Retrieval,
    pub context: AssembledContext,
    pub answer: Answer,
}

/// Retrieve, assemble, answer; keeps the intermediate values. Abbreviated
/// month names are spelled out before retrieval.
pub fn answer_pipeline_traced(
    q: &Query,
    kb: &KnowledgeBase,
    embedder: &dyn Embedder,
    answerer: &dyn Answerer,
    settings: &QaSettings,
) -> Result<PipelineTrace, QaError> {
    let mut retrieval = retrieve(kb, embedder, &expand_month_abbreviations(&q.text), settings.k)?;
    retrieval.query = q.text.clone();
    let context = assemble_context(q, &retrieval, kb, settings.context_cap);
    let answer = answerer.answer(q, &context)?;
    Ok(PipelineTrace { retrieval, context, answer })
}

pub fn answer_pipeline(
    q: &Query,
    kb: &KnowledgeBase,
    embedder: &dyn Embedder,
    answerer: &dyn Answerer,
    settings: &QaSettings,
) -> Result<Answer, QaError> {
    answer_pipeline_traced(q, kb, embedder, answerer, settings).map(|t| t.answer)
}
