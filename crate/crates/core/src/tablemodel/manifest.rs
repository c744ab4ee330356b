//! Line-oriented table manifest format.
//!
//! ```text
//! table_id: network-deductible
//! caption: network deductible
//! n_rows: 2
//! n_cols: 2
//! header_rows: 1
//! header_cols: 1
//! cell 0 0 1 1 Month
//! cell 0 1 1 1 You only
//! cell 1 0 1 1 January
//! cell 1 1 1 1 $250.00
//! ---
//! ```
//!
//! Blocks are separated by `---`. Annotation manifests additionally put a
//! `region <page> <x0> <y0> <x1> <y1>` line before a block. Cell text runs to
//! the end of the line and is kept byte-exact.

use thiserror::Error;

use super::{validate_grid, Cell, SourceRef, TableGrid};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("manifest line {line}, column {column}: {message}")]
pub struct ManifestError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ManifestError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> ManifestError {
        ManifestError { line, column, message: message.into() }
    }
}

/// Placement of an annotated table on a page.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionLine {
    pub line: usize,
    pub page: usize,
    pub bbox: (usize, usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestBlock {
    pub region: Option<RegionLine>,
    pub grid: TableGrid,
}

#[derive(Default)]
struct BlockBuilder {
    start_line: usize,
    region: Option<RegionLine>,
    table_id: Option<String>,
    caption: Option<String>,
    n_rows: Option<usize>,
    n_cols: Option<usize>,
    header_rows: Option<usize>,
    header_cols: Option<usize>,
    cells: Vec<Cell>,
    touched: bool,
}

impl BlockBuilder {
    fn finish(self, ordinal: usize) -> Result<ManifestBlock, ManifestError> {
        let line = self.start_line;
        let n_rows = self.n_rows.ok_or_else(|| ManifestError::new(line, 1, "missing key n_rows"))?;
        let n_cols = self.n_cols.ok_or_else(|| ManifestError::new(line, 1, "missing key n_cols"))?;
        let grid = TableGrid {
            table_id: self.table_id.unwrap_or_else(|| format!("table{ordinal}")),
            caption: self.caption.unwrap_or_default(),
            n_rows,
            n_cols,
            header_row_count: self.header_rows.unwrap_or(1.min(n_rows.saturating_sub(1))),
            header_col_count: self.header_cols.unwrap_or(1.min(n_cols.saturating_sub(1))),
            cells: self.cells,
            source: SourceRef::default(),
        };
        let report = validate_grid(&grid);
        if !report.is_valid() {
            return Err(ManifestError::new(line, 1, format!("table {:?} is not a valid grid: {report}", grid.table_id)));
        }
        Ok(ManifestBlock { region: self.region, grid })
    }
}

fn parse_usize(token: &str, line: usize, column: usize, what: &str) -> Result<usize, ManifestError> {
    token
        .parse::<usize>()
        .map_err(|_| ManifestError::new(line, column, format!("expected non-negative integer for {what}, found {token:?}")))
}

/// Splits `s` into whitespace-separated tokens with their 1-based columns,
/// stopping after `max` tokens; the remainder (after one separating space)
/// is returned verbatim.
fn split_fields(s: &str, max: usize) -> (Vec<(usize, &str)>, Option<&str>) {
    let mut fields = Vec::new();
    let mut rest = s;
    let mut offset = 0;
    while fields.len() < max {
        let trimmed = rest.trim_start_matches(' ');
        offset += rest.len() - trimmed.len();
        if trimmed.is_empty() {
            return (fields, None);
        }
        let end = trimmed.find(' ').unwrap_or(trimmed.len());
        fields.push((offset + 1, &trimmed[..end]));
        offset += end;
        rest = &trimmed[end..];
    }
    let tail = rest.strip_prefix(' ');
    (fields, tail.or(if rest.is_empty() { None } else { Some(rest) }))
}

/// Parses every block of a manifest, including optional region lines.
pub fn parse_manifest_blocks(text: &str) -> Result<Vec<ManifestBlock>, ManifestError> {
    let mut blocks = Vec::new();
    let mut cur = BlockBuilder::default();

    for (i, raw_line) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if !cur.touched {
            cur.start_line = line_no;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if line.trim() == "---" {
            if cur.touched {
                let done = std::mem::take(&mut cur);
                blocks.push(done.finish(blocks.len())?);
            }
            continue;
        }

        if let Some(rest) = line.strip_prefix("cell") {
            if !(rest.is_empty() || rest.starts_with(' ')) {
                return Err(ManifestError::new(line_no, 1, format!("unknown record {line:?}")));
            }
            cur.touched = true;
            let (fields, tail) = split_fields(rest, 4);
            if fields.len() < 4 {
                return Err(ManifestError::new(line_no, line.len() + 1, "cell record needs <row> <col> <row_span> <col_span>"));
            }
            let names = ["row", "col", "row_span", "col_span"];
            let mut nums = [0usize; 4];
            for (k, (col, tok)) in fields.iter().enumerate() {
                nums[k] = parse_usize(tok, line_no, col + 4, names[k])?;
            }
            if nums[2] == 0 || nums[3] == 0 {
                return Err(ManifestError::new(line_no, 5, "spans must be at least 1"));
            }
            cur.cells.push(Cell::new(nums[0], nums[1], nums[2], nums[3], tail.unwrap_or("")));
            continue;
        }

        if let Some(rest) = line.strip_prefix("region") {
            if !(rest.is_empty() || rest.starts_with(' ')) {
                return Err(ManifestError::new(line_no, 1, format!("unknown record {line:?}")));
            }
            if cur.touched {
                return Err(ManifestError::new(line_no, 1, "region line must precede its table block"));
            }
            let (fields, tail) = split_fields(rest, 5);
            if fields.len() < 5 || tail.is_some_and(|t| !t.trim().is_empty()) {
                return Err(ManifestError::new(line_no, 1, "region record needs <page> <x0> <y0> <x1> <y1>"));
            }
            let mut nums = [0usize; 5];
            for (k, (col, tok)) in fields.iter().enumerate() {
                nums[k] = parse_usize(tok, line_no, col + 6, "region")?;
            }
            cur.touched = true;
            cur.region = Some(RegionLine { line: line_no, page: nums[0], bbox: (nums[1], nums[2], nums[3], nums[4]) });
            continue;
        }

        let Some((key, value)) = line.split_once(':') else {
            return Err(ManifestError::new(line_no, 1, format!("expected `key: value`, `cell` or `region`, found {line:?}")));
        };
        cur.touched = true;
        let key = key.trim();
        let value_col = key.len() + 2;
        let value = value.trim();
        let dup = |seen: bool| {
            if seen {
                Err(ManifestError::new(line_no, 1, format!("duplicate key {key}")))
            } else {
                Ok(())
            }
        };
        match key {
            "table_id" => {
                dup(cur.table_id.is_some())?;
                if value.is_empty() {
                    return Err(ManifestError::new(line_no, value_col, "table_id must not be empty"));
                }
                cur.table_id = Some(value.to_string());
            }
            "caption" => {
                dup(cur.caption.is_some())?;
                cur.caption = Some(value.to_string());
            }
            "n_rows" => {
                dup(cur.n_rows.is_some())?;
                let n = parse_usize(value, line_no, value_col, key)?;
                if n == 0 {
                    return Err(ManifestError::new(line_no, value_col, "n_rows must be at least 1"));
                }
                cur.n_rows = Some(n);
            }
            "n_cols" => {
                dup(cur.n_cols.is_some())?;
                let n = parse_usize(value, line_no, value_col, key)?;
                if n == 0 {
                    return Err(ManifestError::new(line_no, value_col, "n_cols must be at least 1"));
                }
                cur.n_cols = Some(n);
            }
            "header_rows" => {
                dup(cur.header_rows.is_some())?;
                cur.header_rows = Some(parse_usize(value, line_no, value_col, key)?);
            }
            "header_cols" => {
                dup(cur.header_cols.is_some())?;
                cur.header_cols = Some(parse_usize(value, line_no, value_col, key)?);
            }
            other => return Err(ManifestError::new(line_no, 1, format!("unknown key {other:?}"))),
        }
    }
    if cur.touched {
        blocks.push(cur.finish(blocks.len())?);
    }
    Ok(blocks)
}

/// Parses all tables in a manifest. Region lines, if any, are ignored.
pub fn tables_from_manifest(text: &str) -> Result<Vec<TableGrid>, ManifestError> {
    Ok(parse_manifest_blocks(text)?.into_iter().map(|b| b.grid).collect())
}

/// Parses a manifest holding exactly one table.
pub fn grid_from_manifest(text: &str) -> Result<TableGrid, ManifestError> {
    let mut grids = tables_from_manifest(text)?;
    match grids.len() {
        1 => Ok(grids.remove(0)),
        n => Err(ManifestError::new(1, 1, format!("expected exactly one table, found {n}"))),
    }
}

/// Serializes one table. Cells are written in row-major anchor order.
pub fn grid_to_manifest(grid: &TableGrid) -> String {
    let mut out = String::new();
    out.push_str(&format!("table_id: {}\n", grid.table_id));
    out.push_str(&format!("caption: {}\n", grid.caption));
    out.push_str(&format!("n_rows: {}\n", grid.n_rows));
    out.push_str(&format!("n_cols: {}\n", grid.n_cols));
    out.push_str(&format!("header_rows: {}\n", grid.header_row_count));
    out.push_str(&format!("header_cols: {}\n", grid.header_col_count));
    let mut cells: Vec<&Cell> = grid.cells.iter().collect();
    cells.sort_by_key(|c| (c.row, c.col));
    for c in cells {
        out.push_str(&format!("cell {} {} {} {} {}\n", c.row, c.col, c.row_span, c.col_span, c.raw_text));
    }
    out
}

/// Serializes several tables separated by `---`.
pub fn tables_to_manifest(grids: &[TableGrid]) -> String {
    grids.iter().map(grid_to_manifest).collect::<Vec<_>>().join("---\n")
}

/// Serializes annotation blocks, each preceded by its region line if it has one.
pub fn blocks_to_manifest(blocks: &[ManifestBlock]) -> String {
    blocks
        .iter()
        .map(|b| {
            let mut s = String::new();
            if let Some(r) = &b.region {
                let (x0, y0, x1, y1) = r.bbox;
                s.push_str(&format!("region {} {x0} {y0} {x1} {y1}\n", r.page));
            }
            s.push_str(&grid_to_manifest(&b.grid));
            s
        })
        .collect::<Vec<_>>()
        .join("---\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "table_id: t1\nn_rows: 2\nn_cols: 2\ncell 0 0 1 1 Month\ncell 0 1 1 1 You only\ncell 1 0 1 1 January\ncell 1 1 1 1 $250.00\n";

    #[test]
    fn minimal_two_by_two() {
        let g = grid_from_manifest(MINIMAL).unwrap();
        assert_eq!(g.cells.len(), 4);
        assert_eq!((g.n_rows, g.n_cols, g.header_row_count, g.header_col_count), (2, 2, 1, 1));
        assert_eq!(g.cells[3].parsed.unwrap().amount_cents, 25000);
        assert!(g.validate().is_valid());
    }

    #[test]
    fn missing_n_cols_is_a_parse_error() {
        let err = grid_from_manifest("table_id: t\nn_rows: 1\ncell 0 0 1 1 x\n").unwrap_err();
        assert!(err.message.contains("n_cols"), "{err}");
    }

    #[test]
    fn bad_integer_reports_line_and_column() {
        let err = grid_from_manifest("n_rows: 1\nn_cols: 1\ncell 0 x 1 1 v\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.column, 8);
    }

    #[test]
    fn raw_text_is_byte_exact() {
        let text = "n_rows: 1\nn_cols: 2\nheader_rows: 0\nheader_cols: 0\ncell 0 0 1 1   padded, \"quoted\"  \ncell 0 1 1 1\n";
        let g = grid_from_manifest(text).unwrap();
        assert_eq!(g.cells[0].raw_text, "  padded, \"quoted\"  ");
        assert_eq!(g.cells[1].raw_text, "");
    }

    #[test]
    fn multiple_tables_and_regions() {
        let text = format!("region 0 10 10 100 60\n{MINIMAL}---\nregion 1 5 5 50 50\n{}", MINIMAL.replace("t1", "t2"));
        let blocks = parse_manifest_blocks(&text).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[1].grid.table_id, "t2");
        assert_eq!(blocks[1].region.unwrap().page, 1);
        assert_eq!(blocks[0].region.unwrap().bbox, (10, 10, 100, 60));
    }

    #[test]
    fn overlapping_cells_rejected() {
        let text = "n_rows: 1\nn_cols: 1\nheader_rows: 0\nheader_cols: 0\ncell 0 0 1 1 a\ncell 0 0 1 1 b\n";
        assert!(grid_from_manifest(text).is_err());
    }

    #[test]
    fn round_trip() {
        let g = grid_from_manifest(MINIMAL).unwrap();
        assert_eq!(grid_from_manifest(&grid_to_manifest(&g)).unwrap(), g);
    }
}
