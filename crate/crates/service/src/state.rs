use std::sync::{Arc, RwLock};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use talentmine_core::build::{build_chunks, BuildConfig};
use talentmine_core::index::{kb_build, kb_load, kb_save, Embedder, HashEmbedder, KnowledgeBase};
use talentmine_core::ingest::DocumentBundle;
use talentmine_core::linearize::CompletionProvider;
use talentmine_core::qa::{Answerer, ExtractiveAnswerer, ProviderAnswerer, QaSettings};
use tokio::sync::{Mutex, OwnedMutexGuard};

use crate::config::{AnswererChoice, ServiceConfig};
use crate::provider::HttpCompletionProvider;
use crate::ServiceError;

/// An immutable knowledge base plus facts about its build.
#[derive(Debug)]
pub struct KbSnapshot {
    pub kb: Arc<KnowledgeBase>,
    pub doc_count: usize,
    pub chunk_count: usize,
    /// Unix seconds.
    pub built_at: u64,
    pub build_millis: u64,
}

impl KbSnapshot {
    fn new(kb: KnowledgeBase, build_millis: u64) -> KbSnapshot {
        KbSnapshot { doc_count: kb.doc_ids().len(), chunk_count: kb.len(), built_at: kb.created_at(), build_millis, kb: Arc::new(kb) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KbStats {
    pub loaded: bool,
    pub kb_id: Option<String>,
    pub embedder_id: String,
    pub dim: usize,
    pub doc_count: usize,
    pub chunk_count: usize,
    pub table_chunk_count: usize,
    pub built_at: Option<u64>,
    pub build_millis: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub doc_id: String,
    /// Chunks contributed by this document.
    pub chunks_added: usize,
    /// Chunks of an earlier version of the same document that were dropped.
    pub chunks_replaced: usize,
    pub table_count: usize,
    pub data_cell_count: usize,
    pub table_chunks: usize,
    pub prose_chunks: usize,
    pub regions_without_grid: usize,
    pub doc_count: usize,
    pub chunk_count: usize,
}

/// Held for the duration of one ingest; a second ingest cannot start meanwhile.
pub struct IngestPermit {
    _guard: OwnedMutexGuard<()>,
}

pub struct AppState {
    config: ServiceConfig,
    embedder: HashEmbedder,
    provider: Option<Arc<dyn CompletionProvider>>,
    answerer: Arc<dyn Answerer>,
    snapshot: RwLock<Option<Arc<KbSnapshot>>>,
    ingest: Arc<Mutex<()>>,
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl AppState {
    /// Validates `config`, wires the provider and loads the KB file if it exists.
    pub fn new(config: ServiceConfig) -> Result<AppState, ServiceError> {
        let provider: Option<Arc<dyn CompletionProvider>> =
            config.provider.clone().map(|p| Arc::new(HttpCompletionProvider::new(p)) as Arc<dyn CompletionProvider>);
        AppState::with_provider(config, provider)
    }

    /// Like [`AppState::new`], with the completion provider supplied by the caller.
    pub fn with_provider(config: ServiceConfig, provider: Option<Arc<dyn CompletionProvider>>) -> Result<AppState, ServiceError> {
        config.validate()?;
        let answerer: Arc<dyn Answerer> = match (config.answerer, &provider) {
            (AnswererChoice::Extractive, _) => Arc::new(ExtractiveAnswerer { not_found_phrase: config.not_found_phrase.clone() }),
            (AnswererChoice::Provider, Some(p)) => {
                let mut a = ProviderAnswerer::new(p.clone());
                a.not_found_phrase = config.not_found_phrase.clone();
                Arc::new(a)
            }
            (AnswererChoice::Provider, None) => return Err(ServiceError::Config("qa.answerer = provider needs a provider".into())),
        };
        let embedder = HashEmbedder::new(config.embedder_dim);
        let mut snapshot = None;
        if let Some(path) = config.kb_path.as_deref().filter(|p| p.exists()) {
            let kb = kb_load(path)?;
            if kb.embedder_id() != embedder.id() || kb.dim() != embedder.dim() {
                return Err(ServiceError::Config(format!(
                    "{} was built with {}/{}, but the service embeds with {}/{}",
                    path.display(),
                    kb.embedder_id(),
                    kb.dim(),
                    embedder.id(),
                    embedder.dim()
                )));
            }
            snapshot = Some(Arc::new(KbSnapshot::new(kb, 0)));
        }
        Ok(AppState { config, embedder, provider, answerer, snapshot: RwLock::new(snapshot), ingest: Arc::new(Mutex::new(())) })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn embedder(&self) -> &HashEmbedder {
        &self.embedder
    }

    pub fn answerer(&self) -> &dyn Answerer {
        self.answerer.as_ref()
    }

    pub fn qa_settings(&self, k: Option<usize>) -> QaSettings {
        QaSettings { k: k.unwrap_or(self.config.k), context_cap: self.config.context_cap }
    }

    pub fn snapshot(&self) -> Option<Arc<KbSnapshot>> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    fn publish(&self, snap: KbSnapshot) {
        *self.snapshot.write().expect("snapshot lock") = Some(Arc::new(snap));
    }

    /// `None` while another ingest holds the permit.
    pub fn try_begin_ingest(&self) -> Option<IngestPermit> {
        self.ingest.clone().try_lock_owned().ok().map(|g| IngestPermit { _guard: g })
    }

    pub fn stats(&self) -> KbStats {
        let snap = self.snapshot();
        let kb = snap.as_ref().map(|s| &s.kb);
        KbStats {
            loaded: snap.is_some(),
            kb_id: kb.map(|k| k.kb_id().to_string()),
            embedder_id: self.embedder.id().to_string(),
            dim: self.embedder.dim(),
            doc_count: snap.as_ref().map_or(0, |s| s.doc_count),
            chunk_count: snap.as_ref().map_or(0, |s| s.chunk_count),
            table_chunk_count: kb.map_or(0, |k| k.chunks().iter().filter(|c| c.kind.is_table()).count()),
            built_at: snap.as_ref().map(|s| s.built_at),
            build_millis: snap.as_ref().map(|s| s.build_millis),
        }
    }

    /// Builds chunks for `doc`, merges them with the current snapshot's chunks
    /// of other documents, and publishes the result. Blocking.
    pub fn ingest(&self, _permit: &IngestPermit, doc: DocumentBundle) -> Result<IngestSummary, ServiceError> {
        let start = Instant::now();
        let build_config = BuildConfig { kb_id: self.config.kb_id.clone(), linearizer: self.config.linearizer, ..BuildConfig::default() };
        let built = build_chunks(std::slice::from_ref(&doc), &build_config, self.provider.as_deref())?;
        let doc_id = doc.source.doc_id.clone();
        let previous = self.snapshot();
        let mut chunks = Vec::new();
        let mut replaced = 0;
        if let Some(prev) = &previous {
            for c in prev.kb.chunks() {
                if c.doc_id == doc_id {
                    replaced += 1;
                } else {
                    chunks.push(c.clone());
                }
            }
        }
        let added = built.chunks.len();
        chunks.extend(built.chunks);
        let kb = kb_build(&self.config.kb_id, chunks, &self.embedder)?.with_created_at(now_secs());
        if let Some(path) = &self.config.kb_path {
            kb_save(&kb, path)?;
        }
        let snap = KbSnapshot::new(kb, start.elapsed().as_millis() as u64);
        let s = &built.summary;
        let summary = IngestSummary {
            doc_id,
            chunks_added: added,
            chunks_replaced: replaced,
            table_count: s.table_count,
            data_cell_count: s.data_cell_count,
            table_chunks: s.table_chunks,
            prose_chunks: s.prose_chunks,
            regions_without_grid: s.regions_without_grid,
            doc_count: snap.doc_count,
            chunk_count: snap.chunk_count,
        };
        self.publish(snap);
        Ok(summary)
    }
}
