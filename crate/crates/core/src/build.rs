//! Offline preprocessing: documents in, knowledge base out.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::{chunk_csv_rows, chunk_prose, chunk_table, kb_build, Chunk, ChunkKind, Embedder, IndexError, KnowledgeBase, TableGranularity};
use crate::ingest::{split_document, DocumentBundle, IngestError};
use crate::linearize::{csv_linearize, llm_linearize, reference_linearize, CompletionProvider, LinearizeError, PromptPayload, PromptTemplate, SentenceStyle};
use crate::tablemodel::TableGrid;

pub const DEFAULT_PROSE_MAX_CHARS: usize = 512;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("document {doc_id:?}: {source}")]
    Ingest { doc_id: String, source: IngestError },
    #[error("table {table_id:?}: {source}")]
    Linearize { table_id: String, source: LinearizeError },
    #[error("the provider linearizer needs a completion provider")]
    NoProvider,
    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearizerKind {
    Reference,
    Provider,
    Csv,
}

impl LinearizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinearizerKind::Reference => "reference",
            LinearizerKind::Provider => "provider",
            LinearizerKind::Csv => "csv",
        }
    }
}

impl fmt::Display for LinearizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinearizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reference" => Ok(LinearizerKind::Reference),
            "provider" => Ok(LinearizerKind::Provider),
            "csv" => Ok(LinearizerKind::Csv),
            other => Err(format!("unknown linearizer {other:?} (expected reference, provider or csv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub kb_id: String,
    pub linearizer: LinearizerKind,
    /// With the CSV linearizer, per-sentence means one chunk per CSV record.
    pub granularity: TableGranularity,
    pub include_prose: bool,
    pub prose_max_chars: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            kb_id: "kb".into(),
            linearizer: LinearizerKind::Reference,
            granularity: TableGranularity::PerSentence,
            include_prose: true,
            prose_max_chars: DEFAULT_PROSE_MAX_CHARS,
        }
    }
}

impl BuildConfig {
    /// Name of the table chunking actually used.
    pub fn chunking_label(&self) -> &'static str {
        match (self.linearizer, self.granularity) {
            (LinearizerKind::Csv, TableGranularity::PerSentence) => "per-row",
            (_, TableGranularity::PerSentence) => "per-sentence",
            (_, TableGranularity::PerTable) => "per-table",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub doc_count: usize,
    pub table_count: usize,
    pub data_cell_count: usize,
    pub table_chunks: usize,
    pub prose_chunks: usize,
    pub chunk_count: usize,
    /// Detected regions that could not be linearized because no grid was available.
    pub regions_without_grid: usize,
}

/// Chunks of all documents plus the grids they were made from.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltChunks {
    pub chunks: Vec<Chunk>,
    pub grids: Vec<TableGrid>,
    pub summary: BuildSummary,
}

/// Splits, linearizes and chunks every document in order.
pub fn build_chunks(
    docs: &[DocumentBundle],
    config: &BuildConfig,
    provider: Option<&dyn CompletionProvider>,
) -> Result<BuiltChunks, BuildError> {
    let mut seen = std::collections::HashSet::new();
    let mut out = BuiltChunks { chunks: Vec::new(), grids: Vec::new(), summary: BuildSummary::default() };
    let template = PromptTemplate::default_table_to_text();
    for doc in docs {
        let doc_id = doc.source.doc_id.clone();
        if !seen.insert(doc_id.clone()) {
            return Err(BuildError::DuplicateDocument(doc_id));
        }
        let split = split_document(&doc.source, doc.annotations.as_deref())
            .map_err(|source| BuildError::Ingest { doc_id: doc_id.clone(), source })?;
        out.summary.doc_count += 1;
        for region in split.regions {
            let Some(grid) = region.grid else {
                out.summary.regions_without_grid += 1;
                continue;
            };
            let lin_err = |source| BuildError::Linearize { table_id: grid.table_id.clone(), source };
            let chunks = match config.linearizer {
                LinearizerKind::Csv => match config.granularity {
                    TableGranularity::PerSentence => chunk_csv_rows(&doc_id, &grid),
                    TableGranularity::PerTable => vec![Chunk {
                        chunk_id: format!("{doc_id}/table/{}/00000", grid.table_id),
                        text: csv_linearize(&grid),
                        kind: ChunkKind::Table,
                        provenance: None,
                        doc_id: doc_id.clone(),
                    }],
                },
                LinearizerKind::Reference => {
                    let lin = reference_linearize(&grid, SentenceStyle::default()).map_err(lin_err)?;
                    chunk_table(&doc_id, &lin, config.granularity)
                }
                LinearizerKind::Provider => {
                    let provider = provider.ok_or(BuildError::NoProvider)?;
                    let lin = llm_linearize(&grid, PromptPayload::Grid(&grid), provider, &template).map_err(lin_err)?;
                    chunk_table(&doc_id, &lin, config.granularity)
                }
            };
            out.summary.table_count += 1;
            out.summary.data_cell_count += grid.data_cell_count();
            out.summary.table_chunks += chunks.len();
            out.chunks.extend(chunks);
            out.grids.push(grid);
        }
        if config.include_prose {
            let prose = chunk_prose(&doc_id, &split.prose, config.prose_max_chars);
            out.summary.prose_chunks += prose.len();
            out.chunks.extend(prose);
        }
    }
    out.summary.chunk_count = out.chunks.len();
    Ok(out)
}

pub fn build_knowledge_base(
    docs: &[DocumentBundle],
    config: &BuildConfig,
    embedder: &dyn Embedder,
    provider: Option<&dyn CompletionProvider>,
) -> Result<(KnowledgeBase, Vec<TableGrid>, BuildSummary), BuildError> {
    let built = build_chunks(docs, config, provider)?;
    let kb = kb_build(&config.kb_id, built.chunks, embedder)?;
    Ok((kb, built.grids, built.summary))
}

/// Annotated grids of all documents, with their sources filled in.
pub fn corpus_grids(docs: &[DocumentBundle]) -> Result<Vec<TableGrid>, BuildError> {
    let mut grids = Vec::new();
    for doc in docs {
        let split = split_document(&doc.source, doc.annotations.as_deref())
            .map_err(|source| BuildError::Ingest { doc_id: doc.source.doc_id.clone(), source })?;
        grids.extend(split.regions.into_iter().filter_map(|r| r.grid));
    }
    Ok(grids)
}
