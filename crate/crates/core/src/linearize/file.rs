//! Linearized output file: one sentence per line, each preceded by a
//! `# table:<id> cell:<row>,<col>` provenance comment.

use crate::tablemodel::CellRef;

use super::reference::sentence_value;
use super::{CellSentence, LinearizeError, LinearizedTable};

/// Plain sentences, one per line, preamble first.
pub fn render_sentences(lin: &LinearizedTable) -> String {
    let mut out = String::new();
    if let Some(p) = &lin.preamble {
        out.push_str(p);
        out.push('\n');
    }
    for s in &lin.sentences {
        out.push_str(&s.text);
        out.push('\n');
    }
    out
}

/// File form with provenance comments.
pub fn render_linearized(lin: &LinearizedTable) -> String {
    let mut out = String::new();
    if let Some(p) = &lin.preamble {
        out.push_str(&format!("# table:{} preamble\n{p}\n", lin.table_id));
    }
    for s in &lin.sentences {
        out.push_str(&format!("# table:{} cell:{},{}\n{}\n", s.provenance.table_id, s.provenance.row, s.provenance.col, s.text));
    }
    for e in &lin.extras {
        out.push_str(&format!("# table:{} extra\n{e}\n", lin.table_id));
    }
    out
}

enum Pending {
    Cell(CellRef),
    Preamble(String),
    Extra(String),
}

/// Reads a file written by [`render_linearized`]; several tables may be
/// concatenated.
pub fn read_linearized(text: &str) -> Result<Vec<LinearizedTable>, LinearizeError> {
    let mut tables: Vec<LinearizedTable> = Vec::new();
    let mut pending: Option<Pending> = None;
    let err = |line: usize, message: String| LinearizeError::File { line, message };

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix("# ") {
            let (table, what) = comment
                .split_once(' ')
                .ok_or_else(|| err(line_no, format!("malformed provenance comment {line:?}")))?;
            let table_id = table
                .strip_prefix("table:")
                .ok_or_else(|| err(line_no, format!("expected `table:<id>` in {line:?}")))?
                .to_string();
            pending = Some(match what {
                "preamble" => Pending::Preamble(table_id),
                "extra" => Pending::Extra(table_id),
                _ => {
                    let pos = what.strip_prefix("cell:").ok_or_else(|| err(line_no, format!("unknown marker {what:?}")))?;
                    let (r, c) = pos.split_once(',').ok_or_else(|| err(line_no, format!("bad cell position {pos:?}")))?;
                    let row = r.parse().map_err(|_| err(line_no, format!("bad row {r:?}")))?;
                    let col = c.parse().map_err(|_| err(line_no, format!("bad column {c:?}")))?;
                    Pending::Cell(CellRef { table_id, row, col })
                }
            });
            continue;
        }
        let marker = pending.take().ok_or_else(|| err(line_no, "sentence without provenance comment".into()))?;
        let table_id = match &marker {
            Pending::Cell(p) => p.table_id.clone(),
            Pending::Preamble(t) | Pending::Extra(t) => t.clone(),
        };
        if tables.last().is_none_or(|t| t.table_id != table_id) {
            tables.push(LinearizedTable { table_id, ..Default::default() });
        }
        let table = tables.last_mut().expect("pushed above");
        match marker {
            Pending::Cell(provenance) => table.sentences.push(CellSentence {
                text: line.to_string(),
                value: sentence_value(line),
                provenance,
            }),
            Pending::Preamble(_) => table.preamble = Some(line.to_string()),
            Pending::Extra(_) => table.extras.push(line.to_string()),
        }
    }
    if pending.is_some() {
        return Err(err(text.lines().count(), "provenance comment without sentence".into()));
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::{reference_linearize, SentenceStyle};
    use crate::tablemodel::grid_from_manifest;

    #[test]
    fn file_round_trip() {
        let g = grid_from_manifest(
            "table_id: t\ncaption: network deductible\nn_rows: 2\nn_cols: 3\ncell 0 0 1 1 Month\ncell 0 1 1 1 You only\ncell 0 2 1 1 You + family\ncell 1 0 1 1 May\ncell 1 1 1 1 $250.00\ncell 1 2 1 1 $2,000.00\n",
        )
        .unwrap();
        let lin = reference_linearize(&g, SentenceStyle { preamble: true }).unwrap();
        let text = render_linearized(&lin);
        assert!(text.starts_with("# table:t preamble\n"));
        assert!(text.contains("# table:t cell:1,2\nFor May, the network deductible for You + family is $2,000.00.\n"));
        assert_eq!(read_linearized(&text).unwrap(), vec![lin]);
    }

    #[test]
    fn orphan_sentence_rejected() {
        assert!(read_linearized("For May, x is $1.00.\n").is_err());
        assert!(read_linearized("# table:t cell:1,1\n").is_err());
    }
}
