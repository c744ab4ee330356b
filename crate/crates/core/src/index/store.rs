//! Knowledge base files.
//!
//! ```text
//! TMKB v1 <embedder_id> <dim> <count> <checksum> [<kb_id> <created_at>]
//! {"id":...,"kind":...,"doc":...,"prov":[table,row,col]|null,"text":...,"vec":[...]}
//! ...
//! ```
//!
//! The checksum is FNV-1a 64 (16 lowercase hex digits) over every byte after
//! the header line, record newlines included. Floats are written in shortest
//! round-trip form, so vectors reload bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Chunk, ChunkKind, EmbeddingVector, IndexError, KnowledgeBase};
use crate::tablemodel::CellRef;
use crate::text::Fnv1a;

pub const FORMAT_VERSION: &str = "v1";
const MAGIC: &str = "TMKB";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    kind: ChunkKind,
    doc: String,
    prov: Option<(String, usize, usize)>,
    text: String,
    vec: Vec<f64>,
}

fn check_token(what: &str, value: &str) -> Result<(), IndexError> {
    if value.is_empty() || value.chars().any(char::is_whitespace) {
        return Err(IndexError::Inconsistent(format!("{what} {value:?} cannot be written to a header")));
    }
    Ok(())
}

pub fn encode_kb(kb: &KnowledgeBase) -> Result<String, IndexError> {
    check_token("embedder id", kb.embedder_id())?;
    check_token("knowledge base id", kb.kb_id())?;
    let mut body = String::new();
    for (chunk, vector) in kb.chunks().iter().zip(kb.vectors()) {
        let record = Record {
            id: chunk.chunk_id.clone(),
            kind: chunk.kind,
            doc: chunk.doc_id.clone(),
            prov: chunk.provenance.as_ref().map(|p| (p.table_id.clone(), p.row, p.col)),
            text: chunk.text.clone(),
            vec: vector.0.clone(),
        };
        body.push_str(&serde_json::to_string(&record).expect("records always serialize"));
        body.push('\n');
    }
    let mut h = Fnv1a::default();
    h.update(body.as_bytes());
    Ok(format!(
        "{MAGIC} {FORMAT_VERSION} {} {} {} {:016x} {} {}\n{body}",
        kb.embedder_id(),
        kb.dim(),
        kb.len(),
        h.finish(),
        kb.kb_id(),
        kb.created_at()
    ))
}

pub fn decode_kb(data: &str) -> Result<KnowledgeBase, IndexError> {
    let corrupt = |m: String| IndexError::CorruptFile(m);
    let (header, body) = data.split_once('\n').ok_or_else(|| corrupt("missing header line".into()))?;
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.first() != Some(&MAGIC) {
        return Err(corrupt("not a knowledge base file".into()));
    }
    match fields.get(1) {
        Some(&FORMAT_VERSION) => {}
        Some(v) => return Err(IndexError::FormatVersionMismatch { found: v.to_string(), expected: FORMAT_VERSION.into() }),
        None => return Err(corrupt("header has no version".into())),
    }
    if fields.len() != 6 && fields.len() != 8 {
        return Err(corrupt(format!("header has {} fields", fields.len())));
    }
    let embedder_id = fields[2].to_string();
    let dim: usize = fields[3].parse().map_err(|_| corrupt(format!("bad dimension {:?}", fields[3])))?;
    let count: usize = fields[4].parse().map_err(|_| corrupt(format!("bad count {:?}", fields[4])))?;
    let checksum = u64::from_str_radix(fields[5], 16).map_err(|_| corrupt(format!("bad checksum {:?}", fields[5])))?;
    let (kb_id, created_at) = if fields.len() == 8 {
        let ts = fields[7].parse().map_err(|_| corrupt(format!("bad timestamp {:?}", fields[7])))?;
        (fields[6].to_string(), ts)
    } else {
        ("kb".to_string(), 0)
    };

    let mut h = Fnv1a::default();
    h.update(body.as_bytes());
    if h.finish() != checksum {
        return Err(corrupt(format!("checksum mismatch: header {checksum:016x}, content {:016x}", h.finish())));
    }
    if !body.is_empty() && !body.ends_with('\n') {
        return Err(corrupt("last record is not terminated".into()));
    }
    let lines: Vec<&str> = body.lines().collect();
    if lines.len() != count {
        return Err(corrupt(format!("header announces {count} records, found {}", lines.len())));
    }
    let mut chunks = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for (i, line) in lines.iter().enumerate() {
        let r: Record = serde_json::from_str(line).map_err(|e| corrupt(format!("record {}: {e}", i + 1)))?;
        if r.vec.len() != dim {
            return Err(corrupt(format!("record {} has dimension {}, expected {dim}", i + 1, r.vec.len())));
        }
        chunks.push(Chunk {
            chunk_id: r.id,
            text: r.text,
            kind: r.kind,
            provenance: r.prov.map(|(t, row, col)| CellRef::new(t, row, col)),
            doc_id: r.doc,
        });
        vectors.push(EmbeddingVector(r.vec));
    }
    KnowledgeBase::from_parts(kb_id, chunks, vectors, embedder_id, dim, created_at).map_err(|e| match e {
        IndexError::DuplicateChunkId(id) => corrupt(format!("duplicate chunk id {id:?}")),
        other => other,
    })
}

/// Writes to a sibling temporary file and renames it into place.
pub fn kb_save(kb: &KnowledgeBase, path: &Path) -> Result<(), IndexError> {
    let data = encode_kb(kb)?;
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(data.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn kb_load(path: &Path) -> Result<KnowledgeBase, IndexError> {
    let bytes = fs::read(path)?;
    let data = String::from_utf8(bytes).map_err(|_| IndexError::CorruptFile("file is not UTF-8".into()))?;
    decode_kb(&data)
}
