use std::collections::BTreeMap;

use crate::tablemodel::{CellRef, TableGrid};
use crate::text::contains_bounded;

use super::reference::{cell_labels, preamble_for, sentence_value};
use super::{CellSentence, LinearizeError, LinearizedTable};

/// Splits free text into sentences.
///
/// Lines starting with `#` are comments. Within a line a sentence ends at a
/// `.`, `!` or `?` followed by whitespace or the end of the line, so decimal
/// points inside amounts do not split.
pub fn split_sentences(raw: &str) -> Vec<String> {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .flat_map(sentence_spans)
        .map(str::to_string)
        .collect()
}

/// Sentence slices of a single run of text.
pub(crate) fn sentence_spans(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if matches!(c, '.' | '!' | '?') && iter.peek().is_none_or(|&(_, n)| n.is_whitespace()) {
            let end = i + c.len_utf8();
            let s = text[start..end].trim();
            if !s.is_empty() {
                out.push(s);
            }
            start = end;
        }
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest);
    }
    out
}

struct CellKey {
    row: usize,
    col: usize,
    phrases: Vec<String>,
    value_text: String,
}

/// Attributes each sentence of `raw` to the data cell whose header phrases it
/// states, and returns the sentences in row-major order.
///
/// A sentence is matched to the cells whose labels all occur in it; when
/// several match, the one with the longest total label text wins, then the
/// one whose value text occurs. Sentences left unattributed become extras.
/// Every data cell must receive exactly one sentence.
pub fn parse_linearization(raw: &str, grid: &TableGrid) -> Result<LinearizedTable, LinearizeError> {
    let report = grid.validate();
    if !report.is_valid() {
        return Err(LinearizeError::InvalidGrid(report));
    }
    let keys: Vec<CellKey> = grid
        .data_cells()
        .into_iter()
        .map(|cell| {
            let (rows, cols) = cell_labels(grid, cell);
            CellKey { row: cell.row, col: cell.col, phrases: rows.into_iter().chain(cols).collect(), value_text: cell.value_text() }
        })
        .collect();
    let preamble_text = preamble_for(grid);

    let mut preamble = None;
    let mut extras = Vec::new();
    let mut assigned: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();

    for sentence in split_sentences(raw) {
        if preamble.is_none() && sentence == preamble_text {
            preamble = Some(sentence);
            continue;
        }
        let mut best: Vec<&CellKey> = Vec::new();
        let mut best_score = 0;
        for key in &keys {
            if !key.phrases.iter().all(|p| contains_bounded(&sentence, p)) {
                continue;
            }
            let score: usize = key.phrases.iter().map(|p| p.trim().len()).sum();
            if score > best_score {
                best_score = score;
                best.clear();
            }
            if score == best_score {
                best.push(key);
            }
        }
        if best.len() > 1 {
            best.retain(|k| !k.value_text.trim().is_empty() && contains_bounded(&sentence, &k.value_text));
        }
        match best.as_slice() {
            [key] => assigned.entry((key.row, key.col)).or_default().push(sentence),
            _ => extras.push(sentence),
        }
    }

    let mut missing = Vec::new();
    let mut ambiguous = Vec::new();
    let mut sentences = Vec::with_capacity(keys.len());
    for key in &keys {
        match assigned.get(&(key.row, key.col)).map(Vec::as_slice) {
            None | Some([]) => missing.push((key.row, key.col)),
            Some([text]) => sentences.push(CellSentence {
                text: text.clone(),
                provenance: CellRef::new(grid.table_id.clone(), key.row, key.col),
                value: sentence_value(text),
            }),
            Some(_) => ambiguous.push((key.row, key.col)),
        }
    }
    if !missing.is_empty() || !ambiguous.is_empty() {
        return Err(LinearizeError::Coverage { table_id: grid.table_id.clone(), missing, ambiguous });
    }
    let mut lin = LinearizedTable { table_id: grid.table_id.clone(), preamble, sentences, extras };
    lin.sort_row_major();
    Ok(lin)
}
