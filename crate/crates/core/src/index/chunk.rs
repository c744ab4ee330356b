use serde::{Deserialize, Serialize};

use crate::linearize::{csv_records, sentence_spans, LinearizedTable};
use crate::tablemodel::{CellRef, TableGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChunkKind {
    /// One cell sentence.
    TableSentence,
    /// A whole linearized table.
    Table,
    /// One CSV record of a table.
    TableRow,
    Prose,
}

impl ChunkKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChunkKind::TableSentence => "table-sentence",
            ChunkKind::Table => "table",
            ChunkKind::TableRow => "table-row",
            ChunkKind::Prose => "prose",
        }
    }

    pub fn is_table(&self) -> bool {
        !matches!(self, ChunkKind::Prose)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub text: String,
    pub kind: ChunkKind,
    pub provenance: Option<CellRef>,
    pub doc_id: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableGranularity {
    #[default]
    PerSentence,
    PerTable,
}

/// Greedy sentence packing: each block is split at sentence boundaries and
/// sentences are joined with a space while the chunk stays within
/// `max_chars`. Chunks never cross block boundaries. A single sentence longer
/// than `max_chars` is cut at word boundaries.
pub fn chunk_prose(doc_id: &str, blocks: &[String], max_chars: usize) -> Vec<Chunk> {
    let max_chars = max_chars.max(64);
    let mut texts: Vec<String> = Vec::new();
    for block in blocks {
        let flat = block.split_whitespace().collect::<Vec<_>>().join(" ");
        let mut cur = String::new();
        for sentence in sentence_spans(&flat) {
            for piece in cut_long(sentence, max_chars) {
                let len = cur.chars().count();
                if cur.is_empty() {
                    cur = piece;
                } else if len + 1 + piece.chars().count() <= max_chars {
                    cur.push(' ');
                    cur.push_str(&piece);
                } else {
                    texts.push(std::mem::replace(&mut cur, piece));
                }
            }
        }
        if !cur.is_empty() {
            texts.push(cur);
        }
    }
    texts
        .into_iter()
        .enumerate()
        .map(|(n, text)| Chunk {
            chunk_id: format!("{doc_id}/prose/{n:05}"),
            text,
            kind: ChunkKind::Prose,
            provenance: None,
            doc_id: doc_id.to_string(),
        })
        .collect()
}

fn cut_long(sentence: &str, max_chars: usize) -> Vec<String> {
    if sentence.chars().count() <= max_chars {
        return vec![sentence.to_string()];
    }
    let mut out = Vec::new();
    let mut cur = String::new();
    for word in sentence.split(' ') {
        let mut word = word.to_string();
        while word.chars().count() > max_chars {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            let head: String = word.chars().take(max_chars).collect();
            word = word.chars().skip(max_chars).collect();
            out.push(head);
        }
        if cur.is_empty() {
            cur = word;
        } else if cur.chars().count() + 1 + word.chars().count() <= max_chars {
            cur.push(' ');
            cur.push_str(&word);
        } else {
            out.push(std::mem::replace(&mut cur, word));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Chunks a linearized table, one chunk per sentence or one for the table.
pub fn chunk_table(doc_id: &str, lin: &LinearizedTable, granularity: TableGranularity) -> Vec<Chunk> {
    match granularity {
        TableGranularity::PerSentence => lin
            .sentences
            .iter()
            .enumerate()
            .map(|(n, s)| Chunk {
                chunk_id: format!("{doc_id}/sentence/{}/{n:05}", lin.table_id),
                text: s.text.clone(),
                kind: ChunkKind::TableSentence,
                provenance: Some(s.provenance.clone()),
                doc_id: doc_id.to_string(),
            })
            .collect(),
        TableGranularity::PerTable => {
            let text: Vec<&str> = lin.preamble.iter().map(String::as_str).chain(lin.sentences.iter().map(|s| s.text.as_str())).collect();
            vec![Chunk {
                chunk_id: format!("{doc_id}/table/{}/00000", lin.table_id),
                text: text.join(" "),
                kind: ChunkKind::Table,
                provenance: None,
                doc_id: doc_id.to_string(),
            }]
        }
    }
}

/// CSV baseline chunks: one per CSV record, including header rows.
/// Provenance points at the first cell of the row.
pub fn chunk_csv_rows(doc_id: &str, grid: &TableGrid) -> Vec<Chunk> {
    csv_records(grid)
        .into_iter()
        .enumerate()
        .map(|(row, text)| Chunk {
            chunk_id: format!("{doc_id}/row/{}/{row:05}", grid.table_id),
            text,
            kind: ChunkKind::TableRow,
            provenance: Some(CellRef::new(grid.table_id.clone(), row, 0)),
            doc_id: doc_id.to_string(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::{reference_linearize, SentenceStyle};
    use crate::tablemodel::grid_from_manifest;

    fn sentence(len: usize, tag: char) -> String {
        let mut s: String = std::iter::repeat_n(tag, len - 1).collect();
        s.push('.');
        s
    }

    #[test]
    fn short_block_is_one_chunk() {
        let block = "The plan year starts in January and ends in December.".to_string();
        let chunks = chunk_prose("d", std::slice::from_ref(&block), 512);
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].text, block);
        assert_eq!(chunks[0].chunk_id, "d/prose/00000");
    }

    #[test]
    fn splits_at_sentence_boundary() {
        let a = sentence(200, 'a');
        let b = sentence(200, 'b');
        let c = sentence(198, 'c');
        let block = format!("{a} {b} {c}");
        assert_eq!(block.len(), 600);
        let chunks = chunk_prose("d", &[block], 512);
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[0].text, format!("{a} {b}"));
        assert_eq!(chunks[1].text, c);
    }

    #[test]
    fn empty_input() {
        assert!(chunk_prose("d", &[], 512).is_empty());
    }

    #[test]
    fn overlong_sentence_is_cut() {
        let words = vec!["word"; 60].join(" ");
        let chunks = chunk_prose("d", &[words], 64);
        assert!(chunks.iter().all(|c| c.text.chars().count() <= 64));
        assert_eq!(chunks.iter().map(|c| c.text.split(' ').count()).sum::<usize>(), 60);
    }

    #[test]
    fn table_granularities() {
        let g = grid_from_manifest(
            "table_id: t\ncaption: network deductible\nn_rows: 3\nn_cols: 2\ncell 0 0 1 1 Month\ncell 0 1 1 1 You only\ncell 1 0 1 1 January\ncell 1 1 1 1 $250.00\ncell 2 0 1 1 February\ncell 2 1 1 1 $229.00\n",
        )
        .unwrap();
        let lin = reference_linearize(&g, SentenceStyle::default()).unwrap();
        let per = chunk_table("doc", &lin, TableGranularity::PerSentence);
        assert_eq!(per.len(), 2);
        for (c, s) in per.iter().zip(&lin.sentences) {
            assert_eq!(c.provenance.as_ref(), Some(&s.provenance));
            assert_eq!(c.text, s.text);
        }
        assert_eq!(per[1].chunk_id, "doc/sentence/t/00001");
        let whole = chunk_table("doc", &lin, TableGranularity::PerTable);
        assert_eq!(whole.len(), 1);
        assert!(whole[0].text.contains("February"));
        let rows = chunk_csv_rows("doc", &g);
        assert_eq!(rows.iter().map(|c| c.text.as_str()).collect::<Vec<_>>(), ["Month,You only", "January,$250.00", "February,$229.00"]);
    }
}
