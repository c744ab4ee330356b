use crate::tablemodel::{parse_money, Cell, CellRef, MoneyValue, TableGrid};

use super::{CellSentence, LinearizeError, LinearizedTable, SentenceStyle};

/// Phrases identifying a data cell: row labels then column labels.
///
/// Falls back to positional labels (`row 3`, `column 2`) when the grid has no
/// header on that axis or the header texts are blank.
pub(crate) fn cell_labels(grid: &TableGrid, cell: &Cell) -> (Vec<String>, Vec<String>) {
    let path = grid.header_path(cell.row, cell.col).unwrap_or_default();
    let keep = |v: Vec<String>| -> Vec<String> { v.into_iter().filter(|h| !h.trim().is_empty()).collect() };
    let mut rows = keep(path.row_headers);
    let mut cols = keep(path.col_headers);
    if rows.is_empty() {
        rows.push(format!("row {}", cell.row + 1));
    }
    if cols.is_empty() {
        cols.push(format!("column {}", cell.col + 1));
    }
    (rows, cols)
}

fn sentence_for(grid: &TableGrid, cell: &Cell) -> String {
    let (rows, cols) = cell_labels(grid, cell);
    let cols = cols.join(" ");
    let subject = if grid.caption.trim().is_empty() {
        format!("the value of {cols}")
    } else {
        format!("the {} for {cols}", grid.caption.trim())
    };
    format!("For {}, {subject} is {}.", rows.join(", "), cell.value_text())
}

pub fn preamble_for(grid: &TableGrid) -> String {
    if grid.caption.trim().is_empty() {
        format!("The following sentences describe table {}.", grid.table_id)
    } else {
        format!("The following sentences describe the {} table.", grid.caption.trim())
    }
}

/// The value stated by a sentence: the text after its last ` is `, parsed as money.
pub fn sentence_value(text: &str) -> Option<MoneyValue> {
    let idx = text.rfind(" is ")?;
    let tail = text[idx + 4..].trim();
    let tail = tail.strip_suffix('.').unwrap_or(tail);
    parse_money(tail).ok()
}

/// Deterministic linearization: one sentence per data cell, row-major.
pub fn reference_linearize(grid: &TableGrid, style: SentenceStyle) -> Result<LinearizedTable, LinearizeError> {
    let report = grid.validate();
    if !report.is_valid() {
        return Err(LinearizeError::InvalidGrid(report));
    }
    let sentences = grid
        .data_cells()
        .into_iter()
        .map(|cell| CellSentence {
            text: sentence_for(grid, cell),
            provenance: CellRef::new(grid.table_id.clone(), cell.row, cell.col),
            value: cell.parsed,
        })
        .collect();
    Ok(LinearizedTable {
        table_id: grid.table_id.clone(),
        preamble: style.preamble.then(|| preamble_for(grid)),
        sentences,
        extras: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tablemodel::{Cell, SourceRef};

    fn hra_grid() -> TableGrid {
        let mut cells = vec![Cell::single(0, 0, "Month"), Cell::single(0, 1, "You only"), Cell::single(0, 2, "You + spouse")];
        cells.push(Cell::single(1, 0, "January"));
        cells.push(Cell::single(1, 1, "$250.00"));
        cells.push(Cell::single(1, 2, "$500.00"));
        TableGrid {
            table_id: "hra".into(),
            caption: "company HRA contribution".into(),
            n_rows: 2,
            n_cols: 3,
            header_row_count: 1,
            header_col_count: 1,
            cells,
            source: SourceRef::default(),
        }
    }

    #[test]
    fn benefits_sentence() {
        let lin = reference_linearize(&hra_grid(), SentenceStyle::default()).unwrap();
        assert_eq!(lin.sentences[0].text, "For January, the company HRA contribution for You only is $250.00.");
        assert_eq!(lin.sentences[0].value, Some(MoneyValue::usd(25000)));
        assert_eq!(lin.sentences[1].provenance, CellRef::new("hra", 1, 2));
        assert_eq!(sentence_value(&lin.sentences[1].text), Some(MoneyValue::usd(50000)));
    }

    #[test]
    fn degenerate_headers_use_positions() {
        let g = TableGrid {
            table_id: "x".into(),
            caption: String::new(),
            n_rows: 1,
            n_cols: 1,
            header_row_count: 0,
            header_col_count: 0,
            cells: vec![Cell::single(0, 0, "X")],
            source: SourceRef::default(),
        };
        let lin = reference_linearize(&g, SentenceStyle::default()).unwrap();
        assert_eq!(lin.sentences.len(), 1);
        assert_eq!(lin.sentences[0].text, "For row 1, the value of column 1 is X.");
        assert_eq!(lin.sentences[0].value, None);
    }

    #[test]
    fn preamble_is_optional() {
        let lin = reference_linearize(&hra_grid(), SentenceStyle { preamble: true }).unwrap();
        assert_eq!(lin.preamble.as_deref(), Some("The following sentences describe the company HRA contribution table."));
    }

    #[test]
    fn invalid_grid_rejected() {
        let mut g = hra_grid();
        g.cells.pop();
        assert!(matches!(reference_linearize(&g, SentenceStyle::default()), Err(LinearizeError::InvalidGrid(_))));
    }
}
