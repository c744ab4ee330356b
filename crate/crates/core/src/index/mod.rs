//! Chunking, deterministic embedding and exact cosine retrieval over a
//! persisted knowledge base.

mod chunk;
mod embed;
mod kb;
mod store;

pub use chunk::{chunk_csv_rows, chunk_prose, chunk_table, Chunk, ChunkKind, TableGranularity};
pub use embed::{cosine, embed, Embedder, EmbeddingVector, HashEmbedder, DEFAULT_DIM, HASH_EMBEDDER_ID};
pub use kb::{kb_build, retrieve, Hit, KnowledgeBase, Retrieval};
pub use store::{decode_kb, encode_kb, kb_load, kb_save, FORMAT_VERSION};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate chunk id {0:?}")]
    DuplicateChunkId(String),
    #[error("query is empty")]
    EmptyQuery,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("knowledge base was built with embedder {kb} (dim {kb_dim}), not {given} (dim {given_dim})")]
    EmbedderMismatch { kb: String, kb_dim: usize, given: String, given_dim: usize },
    #[error("knowledge base file has format version {found:?}, expected {expected:?}")]
    FormatVersionMismatch { found: String, expected: String },
    #[error("corrupt knowledge base file: {0}")]
    CorruptFile(String),
    #[error("knowledge base is inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
