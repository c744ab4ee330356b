use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Chunk, Embedder, EmbeddingVector, IndexError};

/// Chunks and their vectors, immutable once built.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    kb_id: String,
    chunks: Vec<Chunk>,
    vectors: Vec<EmbeddingVector>,
    embedder_id: String,
    dim: usize,
    created_at: u64,
    by_id: HashMap<String, usize>,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.kb_id == other.kb_id
            && self.chunks == other.chunks
            && self.embedder_id == other.embedder_id
            && self.dim == other.dim
            && self.created_at == other.created_at
            && self.vectors.len() == other.vectors.len()
            && self.vectors.iter().zip(&other.vectors).all(|(a, b)| {
                a.0.len() == b.0.len() && a.0.iter().zip(&b.0).all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }
}

impl KnowledgeBase {
    pub(crate) fn from_parts(
        kb_id: String,
        chunks: Vec<Chunk>,
        vectors: Vec<EmbeddingVector>,
        embedder_id: String,
        dim: usize,
        created_at: u64,
    ) -> Result<KnowledgeBase, IndexError> {
        if chunks.len() != vectors.len() {
            return Err(IndexError::Inconsistent(format!("{} chunks but {} vectors", chunks.len(), vectors.len())));
        }
        if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
            return Err(IndexError::Inconsistent(format!("vector of dimension {} in a dimension {dim} base", v.dim())));
        }
        let mut by_id = HashMap::with_capacity(chunks.len());
        for (i, c) in chunks.iter().enumerate() {
            if by_id.insert(c.chunk_id.clone(), i).is_some() {
                return Err(IndexError::DuplicateChunkId(c.chunk_id.clone()));
            }
        }
        Ok(KnowledgeBase { kb_id, chunks, vectors, embedder_id, dim, created_at, by_id })
    }

    pub fn kb_id(&self) -> &str {
        &self.kb_id
    }

    pub fn chunks(&self) -> &[Chunk] {
        &self.chunks
    }

    pub fn vectors(&self) -> &[EmbeddingVector] {
        &self.vectors
    }

    pub fn embedder_id(&self) -> &str {
        &self.embedder_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Seconds since the Unix epoch.
    pub fn created_at(&self) -> u64 {
        self.created_at
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn chunk(&self, chunk_id: &str) -> Option<&Chunk> {
        self.by_id.get(chunk_id).map(|&i| &self.chunks[i])
    }

    pub fn doc_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.chunks.iter().map(|c| c.doc_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn with_created_at(mut self, created_at: u64) -> KnowledgeBase {
        self.created_at = created_at;
        self
    }
}

/// Embeds every chunk in order. `created_at` starts at 0 so that builds are
/// reproducible; callers that want a wall-clock stamp set it explicitly.
pub fn kb_build(kb_id: &str, chunks: Vec<Chunk>, embedder: &dyn Embedder) -> Result<KnowledgeBase, IndexError> {
    let mut seen = std::collections::HashSet::with_capacity(chunks.len());
    for c in &chunks {
        if !seen.insert(c.chunk_id.as_str()) {
            return Err(IndexError::DuplicateChunkId(c.chunk_id.clone()));
        }
    }
    let vectors: Vec<EmbeddingVector> = chunks.par_iter().map(|c| embedder.embed(&c.text)).collect();
    KnowledgeBase::from_parts(kb_id.to_string(), chunks, vectors, embedder.id().to_string(), embedder.dim(), 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub chunk_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Retrieval {
    pub query: String,
    pub hits: Vec<Hit>,
}

/// Exact top-`k` cosine search. Stored vectors are unit or zero, so the score
/// is the dot product with the normalized query.
pub fn retrieve(kb: &KnowledgeBase, embedder: &dyn Embedder, query: &str, k: usize) -> Result<Retrieval, IndexError> {
    if k == 0 {
        return Err(IndexError::ZeroK);
    }
    if query.trim().is_empty() {
        return Err(IndexError::EmptyQuery);
    }
    if embedder.id() != kb.embedder_id || embedder.dim() != kb.dim {
        return Err(IndexError::EmbedderMismatch {
            kb: kb.embedder_id.clone(),
            kb_dim: kb.dim,
            given: embedder.id().to_string(),
            given_dim: embedder.dim(),
        });
    }
    let q = embedder.embed(query);
    let mut scored: Vec<(f64, &str)> =
        kb.vectors.iter().zip(&kb.chunks).map(|(v, c)| (v.dot(&q), c.chunk_id.as_str())).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    scored.truncate(k);
    Ok(Retrieval {
        query: query.to_string(),
        hits: scored.into_iter().map(|(score, id)| Hit { chunk_id: id.to_string(), score }).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{ChunkKind, HashEmbedder};

    fn chunk(id: &str, text: &str) -> Chunk {
        Chunk { chunk_id: id.into(), text: text.into(), kind: ChunkKind::Prose, provenance: None, doc_id: "d".into() }
    }

    #[test]
    fn empty_kb() {
        let kb = kb_build("kb", vec![], &HashEmbedder::default()).unwrap();
        assert!(kb.is_empty());
        let r = retrieve(&kb, &HashEmbedder::default(), "anything", 3).unwrap();
        assert!(r.hits.is_empty());
    }

    #[test]
    fn duplicate_id_rejected() {
        let err = kb_build("kb", vec![chunk("a", "x"), chunk("a", "y")], &HashEmbedder::default()).unwrap_err();
        assert!(matches!(err, IndexError::DuplicateChunkId(id) if id == "a"));
    }

    #[test]
    fn exact_text_ranks_first() {
        let e = HashEmbedder::default();
        let kb = kb_build(
            "kb",
            vec![chunk("a", "deductible for you only"), chunk("b", "HRA contribution in March"), chunk("c", "March")],
            &e,
        )
        .unwrap();
        let r = retrieve(&kb, &e, "HRA contribution in March", 10).unwrap();
        assert_eq!(r.hits.len(), 3);
        assert_eq!(r.hits[0].chunk_id, "b");
        assert!((r.hits[0].score - 1.0).abs() < 1e-9);
        assert!(r.hits.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn ties_break_by_id() {
        let e = HashEmbedder::default();
        let kb = kb_build("kb", vec![chunk("z", "same words"), chunk("m", "Same, words!")], &e).unwrap();
        let r = retrieve(&kb, &e, "same words", 2).unwrap();
        assert_eq!(r.hits.iter().map(|h| h.chunk_id.as_str()).collect::<Vec<_>>(), ["m", "z"]);
    }

    #[test]
    fn query_errors() {
        let e = HashEmbedder::default();
        let kb = kb_build("kb", vec![chunk("a", "x")], &e).unwrap();
        assert!(matches!(retrieve(&kb, &e, "  ", 1), Err(IndexError::EmptyQuery)));
        assert!(matches!(retrieve(&kb, &e, "x", 0), Err(IndexError::ZeroK)));
        assert!(matches!(retrieve(&kb, &HashEmbedder::new(16), "x", 1), Err(IndexError::EmbedderMismatch { .. })));
    }
}
