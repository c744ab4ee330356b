//! Gold-set evaluation of complete pipelines.

mod gold;
mod report;
mod run;

pub use gold::{load_gold, parse_gold, verify_gold, write_gold, GoldQuery};
pub use report::{compare_methods, CategoryScore, Comparison, ComparisonRow, EvalRecord, EvalReport};
pub use run::{evaluate, match_answer, run_eval, AnswererKind, MethodConfig};

use std::path::PathBuf;

use thiserror::Error;

use crate::build::BuildError;
use crate::qa::QaError;
use crate::tablemodel::MoneyValue;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("gold query {qid}: expected {expected} but the tables say {}", .oracle.map(|v| v.to_string()).unwrap_or_else(|| "nothing".into()))]
    OracleMismatch { qid: String, expected: MoneyValue, oracle: Option<MoneyValue> },
    #[error("unknown method {0:?} (expected semantic or csv)")]
    UnknownMethod(String),
    #[error("no methods to compare")]
    NoMethods,
    #[error(transparent)]
    Qa(#[from] QaError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}
