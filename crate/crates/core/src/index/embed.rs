//! Signed feature-hashing embedder.
//!
//! Text is lowercased and split on non-alphanumeric characters. Each token is
//! hashed with FNV-1a (64 bit); the hash picks a bucket (`h mod D`) and a sign
//! (bit 63 set means negative). The bucket counts are L2-normalized. The
//! result is fully defined by the hash, so it is identical on every platform.

use serde::{Deserialize, Serialize};

use crate::text::{alnum_tokens, fnv1a64};

pub const DEFAULT_DIM: usize = 1024;
pub const HASH_EMBEDDER_ID: &str = "hash-fnv1a";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector(pub Vec<f64>);

impl EmbeddingVector {
    pub fn zeros(dim: usize) -> EmbeddingVector {
        EmbeddingVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }
}

pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        a.dot(b) / (na * nb)
    }
}

pub trait Embedder: Send + Sync {
    /// Stable identifier recorded in knowledge bases; must not contain spaces.
    fn id(&self) -> &str;
    fn dim(&self) -> usize;
    /// Unit-norm vector, or all zeros when the text has no tokens.
    fn embed(&self, text: &str) -> EmbeddingVector;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> HashEmbedder {
        assert!(dim > 0, "embedding dimension must be positive");
        HashEmbedder { dim }
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(DEFAULT_DIM)
    }
}

impl Embedder for HashEmbedder {
    fn id(&self) -> &str {
        HASH_EMBEDDER_ID
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> EmbeddingVector {
        let mut v = vec![0.0f64; self.dim];
        for token in alnum_tokens(text) {
            let h = fnv1a64(token.as_bytes());
            let idx = (h % self.dim as u64) as usize;
            v[idx] += if h >> 63 == 0 { 1.0 } else { -1.0 };
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        EmbeddingVector(v)
    }
}

/// Embeds with the default 1024-dimensional hash embedder.
pub fn embed(text: &str) -> EmbeddingVector {
    HashEmbedder::default().embed(text)
}
