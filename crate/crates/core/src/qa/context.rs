use serde::{Deserialize, Serialize};

use super::Query;
use crate::index::{ChunkKind, KnowledgeBase, Retrieval};

pub const DEFAULT_CONTEXT_CAP: usize = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextBlock {
    pub chunk_id: String,
    pub text: String,
    pub kind: ChunkKind,
    pub score: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledContext {
    pub query_text: String,
    /// In retrieval rank order.
    pub blocks: Vec<ContextBlock>,
}

impl AssembledContext {
    pub fn total_chars(&self) -> usize {
        self.blocks.iter().map(|b| b.text.chars().count()).sum()
    }
}

/// Query first, then the retrieved chunk texts in rank order, keeping the
/// total block text within `cap` characters. The block that crosses the cap
/// is cut to fit and everything ranked below it is dropped. Hits whose ids are
/// not in `kb` are skipped.
pub fn assemble_context(q: &Query, r: &Retrieval, kb: &KnowledgeBase, cap: usize) -> AssembledContext {
    let mut blocks = Vec::new();
    let mut used = 0;
    for hit in &r.hits {
        let Some(chunk) = kb.chunk(&hit.chunk_id) else { continue };
        let len = chunk.text.chars().count();
        let room = cap.saturating_sub(used);
        if room == 0 {
            break;
        }
        let (text, truncated) = if len <= room {
            (chunk.text.clone(), false)
        } else {
            (chunk.text.chars().take(room).collect(), true)
        };
        used += text.chars().count();
        blocks.push(ContextBlock { chunk_id: chunk.chunk_id.clone(), text, kind: chunk.kind, score: hit.score, truncated });
        if truncated {
            break;
        }
    }
    AssembledContext { query_text: q.text.clone(), blocks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{kb_build, retrieve, Chunk, HashEmbedder};

    fn kb() -> KnowledgeBase {
        let chunks = ["alpha beta gamma", "alpha beta", "alpha", "delta"]
            .iter()
            .enumerate()
            .map(|(i, t)| Chunk {
                chunk_id: format!("c{i}"),
                text: t.to_string(),
                kind: ChunkKind::Prose,
                provenance: None,
                doc_id: "d".into(),
            })
            .collect();
        kb_build("kb", chunks, &HashEmbedder::default()).unwrap()
    }

    #[test]
    fn blocks_follow_rank() {
        let kb = kb();
        let e = HashEmbedder::default();
        let r = retrieve(&kb, &e, "alpha beta", 3).unwrap();
        let ctx = assemble_context(&Query::new("alpha beta"), &r, &kb, DEFAULT_CONTEXT_CAP);
        assert_eq!(ctx.blocks.len(), 3);
        let ids: Vec<&str> = ctx.blocks.iter().map(|b| b.chunk_id.as_str()).collect();
        let hit_ids: Vec<&str> = r.hits.iter().map(|h| h.chunk_id.as_str()).collect();
        assert_eq!(ids, hit_ids);
        assert_eq!(ctx.query_text, "alpha beta");
    }

    #[test]
    fn tiny_cap_keeps_one_cut_block() {
        let kb = kb();
        let r = retrieve(&kb, &HashEmbedder::default(), "alpha beta gamma", 4).unwrap();
        let ctx = assemble_context(&Query::new("q"), &r, &kb, 5);
        assert_eq!(ctx.blocks.len(), 1);
        assert!(ctx.blocks[0].truncated);
        assert_eq!(ctx.blocks[0].text, "alpha");
    }

    #[test]
    fn cap_drops_lowest_ranked() {
        let kb = kb();
        let r = retrieve(&kb, &HashEmbedder::default(), "alpha beta gamma", 4).unwrap();
        let ctx = assemble_context(&Query::new("q"), &r, &kb, 16 + 10 + 2);
        assert!(ctx.total_chars() <= 28);
        assert_eq!(ctx.blocks[0].text, "alpha beta gamma");
        assert_eq!(ctx.blocks.len(), 3);
        assert_eq!(ctx.blocks[2].text, "al");
        assert!(ctx.blocks[2].truncated);
    }
}
