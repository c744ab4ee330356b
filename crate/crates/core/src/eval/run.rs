use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::build::{build_knowledge_base, BuildConfig, LinearizerKind};
use crate::index::{Embedder, HashEmbedder, KnowledgeBase, TableGranularity, DEFAULT_DIM};
use crate::ingest::DocumentBundle;
use crate::linearize::ReferenceProvider;
use crate::qa::{answer_pipeline, Answer, AnswerStatus, Answerer, ExtractiveAnswerer, MockQaProvider, ProviderAnswerer, QaError, QaSettings, Query, DEFAULT_CONTEXT_CAP, DEFAULT_K};
use crate::text::fnv1a64;

use super::report::{EvalRecord, EvalReport};
use super::{EvalError, GoldQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnswererKind {
    Extractive,
    /// Provider answerer backed by the offline mock QA model.
    MockProvider,
}

impl AnswererKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnswererKind::Extractive => "extractive",
            AnswererKind::MockProvider => "provider:mock-qa",
        }
    }
}

/// Everything that determines a pipeline's answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub label: String,
    pub build: BuildConfig,
    pub embedder_dim: usize,
    pub k: usize,
    pub context_cap: usize,
    pub answerer: AnswererKind,
}

impl MethodConfig {
    /// Reference sentences, one chunk each, hash embedder, extractive answers, k = 5.
    pub fn semantic() -> MethodConfig {
        MethodConfig {
            label: "semantic".into(),
            build: BuildConfig::default(),
            embedder_dim: DEFAULT_DIM,
            k: DEFAULT_K,
            context_cap: DEFAULT_CONTEXT_CAP,
            answerer: AnswererKind::Extractive,
        }
    }

    /// CSV records as chunks, otherwise identical to [`MethodConfig::semantic`].
    pub fn csv_baseline() -> MethodConfig {
        let mut m = MethodConfig::semantic();
        m.label = "csv".into();
        m.build.linearizer = LinearizerKind::Csv;
        m.build.granularity = TableGranularity::PerSentence;
        m
    }

    pub fn by_name(name: &str) -> Result<MethodConfig, EvalError> {
        match name.trim() {
            "semantic" => Ok(MethodConfig::semantic()),
            "csv" => Ok(MethodConfig::csv_baseline()),
            other => Err(EvalError::UnknownMethod(other.to_string())),
        }
    }

    pub fn embedder(&self) -> HashEmbedder {
        HashEmbedder::new(self.embedder_dim)
    }

    pub fn settings(&self) -> QaSettings {
        QaSettings { k: self.k, context_cap: self.context_cap }
    }

    /// Hash of embedder, chunking, k, answerer and linearizer.
    pub fn fingerprint(&self) -> String {
        let e = self.embedder();
        let key = format!(
            "embedder={}/{};chunking={};k={};answerer={};linearizer={}",
            e.id(),
            e.dim(),
            self.build.chunking_label(),
            self.k,
            self.answerer.as_str(),
            self.build.linearizer
        );
        format!("{:016x}", fnv1a64(key.as_bytes()))
    }

    pub fn answerer_for(&self, kb: Arc<KnowledgeBase>) -> Box<dyn Answerer> {
        match self.answerer {
            AnswererKind::Extractive => Box::new(ExtractiveAnswerer::default()),
            AnswererKind::MockProvider => Box::new(ProviderAnswerer::new(Arc::new(MockQaProvider::new(kb)))),
        }
    }
}

/// Exact match in integer cents; not-found answers never match.
pub fn match_answer(a: &Answer, g: &GoldQuery) -> bool {
    a.status == AnswerStatus::Answered && a.value == Some(g.expected)
}

/// Answers every gold query against a built knowledge base. Queries run in
/// parallel up to the answerer's limit; records are ordered by qid.
pub fn evaluate(
    label: &str,
    fingerprint: &str,
    kb: &KnowledgeBase,
    embedder: &dyn Embedder,
    answerer: &dyn Answerer,
    settings: &QaSettings,
    gold: &[GoldQuery],
) -> Result<EvalReport, EvalError> {
    let run_one = |g: &GoldQuery| -> Result<EvalRecord, QaError> {
        let q = Query::new(g.question.clone());
        let produced = answer_pipeline(&q, kb, embedder, answerer, settings)?;
        let correct = match_answer(&produced, g);
        let not_found = produced.is_not_found();
        Ok(EvalRecord { qid: g.qid.clone(), category: g.category, expected: g.expected, produced, correct, not_found })
    };
    let limit = answerer.max_in_flight();
    let results: Vec<Result<EvalRecord, QaError>> = if limit <= 1 {
        gold.iter().map(run_one).collect()
    } else if limit >= rayon::current_num_threads() {
        gold.par_iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(limit).build().expect("thread pool");
        pool.install(|| gold.par_iter().map(run_one).collect())
    };
    let mut records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    records.sort_by(|a, b| a.qid.cmp(&b.qid));
    Ok(EvalReport::from_records(label, fingerprint, records))
}

/// Builds the method's knowledge base from `docs` and evaluates `gold` on it.
pub fn run_eval(method: &MethodConfig, gold: &[GoldQuery], docs: &[DocumentBundle]) -> Result<EvalReport, EvalError> {
    let embedder = method.embedder();
    let reference = ReferenceProvider::new();
    let (kb, _, _) = build_knowledge_base(docs, &method.build, &embedder, Some(&reference))?;
    let kb = Arc::new(kb);
    let answerer = method.answerer_for(kb.clone());
    evaluate(&method.label, &method.fingerprint(), &kb, &embedder, answerer.as_ref(), &method.settings(), gold)
}
