//! Flat CSV rendering, the representation a plain OCR table export yields.

use crate::tablemodel::TableGrid;

/// One CSV record per grid row; spanned cells are repeated into every
/// position they cover. Fields are quoted only when they contain a comma,
/// quote or line break.
pub fn csv_records(grid: &TableGrid) -> Vec<String> {
    (0..grid.n_rows)
        .map(|r| {
            let fields: Vec<&str> =
                (0..grid.n_cols).map(|c| grid.cell_at(r, c).map(|cell| cell.raw_text.as_str()).unwrap_or("")).collect();
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            // Writing to a Vec<u8> cannot fail.
            w.write_record(&fields).expect("in-memory csv write");
            let bytes = w.into_inner().expect("in-memory csv flush");
            let mut line = String::from_utf8(bytes).expect("csv of utf-8 fields is utf-8");
            line.pop();
            line
        })
        .collect()
}

pub fn csv_linearize(grid: &TableGrid) -> String {
    let mut out = csv_records(grid).join("\n");
    out.push('\n');
    out
}
