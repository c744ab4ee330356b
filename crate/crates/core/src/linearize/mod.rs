//! Table linearization: one natural-language sentence per data cell.
//!
//! Three producers share the [`LinearizedTable`] shape:
//! - [`reference_linearize`], a deterministic rule-based writer whose output
//!   grammar is fixed (`For <rows>, the <caption> for <columns> is <value>.`),
//! - [`llm_linearize`], which prompts a [`CompletionProvider`] and parses the
//!   reply back onto grid cells with [`parse_linearization`],
//! - [`csv_linearize`], the flat CSV baseline.
//!
//! [`verify_coverage`] checks that every data cell is stated exactly once with
//! the right value.

mod coverage;
mod csv_baseline;
mod file;
mod parse;
mod prompt;
mod provider;
mod reference;

pub use coverage::{verify_coverage, CoverageFinding, CoverageReport};
pub use csv_baseline::{csv_linearize, csv_records};
pub use file::{read_linearized, render_linearized, render_sentences};
pub(crate) use parse::sentence_spans;
pub use parse::{parse_linearization, split_sentences};
pub use prompt::{build_prompt, PromptPayload, PromptTemplate};
pub use provider::{llm_linearize, CompletionProvider, ProviderError, ProviderErrorKind, ReferenceProvider};
pub use reference::{preamble_for, reference_linearize, sentence_value};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tablemodel::{CellRef, MoneyValue, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinearizeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(ValidationReport),
    #[error("prompt template {template_id:?} has no payload placeholder")]
    MissingPlaceholder { template_id: String },
    #[error("prompt template {template_id:?} has {count} payload placeholders, expected one")]
    MultiplePlaceholders { template_id: String, count: usize },
    #[error("linearization of table {table_id:?} does not cover the grid: missing {missing:?}, ambiguous {ambiguous:?}")]
    Coverage { table_id: String, missing: Vec<(usize, usize)>, ambiguous: Vec<(usize, usize)> },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("linearized file line {line}: {message}")]
    File { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSentence {
    pub text: String,
    pub provenance: CellRef,
    pub value: Option<MoneyValue>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearizedTable {
    pub table_id: String,
    pub preamble: Option<String>,
    /// Row-major over data cells.
    pub sentences: Vec<CellSentence>,
    /// Sentences that could not be attributed to any cell.
    pub extras: Vec<String>,
}

impl LinearizedTable {
    pub fn sort_row_major(&mut self) {
        self.sentences.sort_by_key(|a| (a.provenance.row, a.provenance.col));
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceStyle {
    /// Emit a caption sentence before the cell sentences.
    pub preamble: bool,
}
