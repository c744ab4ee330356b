//! Table data model shared by every pipeline.
//!
//! A [`TableGrid`] is a rectangular lattice of positions covered by [`Cell`]s,
//! where a cell may span several rows and columns. The first
//! `header_row_count` rows and `header_col_count` columns hold headers; every
//! other cell is a data cell.

mod manifest;
mod money;

pub use manifest::{
    blocks_to_manifest, grid_from_manifest, grid_to_manifest, parse_manifest_blocks, tables_from_manifest, tables_to_manifest, ManifestBlock,
    ManifestError, RegionLine,
};
pub use money::{find_money, parse_money, Currency, MoneyError, MoneyValue};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("position ({row}, {col}) is outside the {n_rows}x{n_cols} grid")]
    OutOfBounds { row: usize, col: usize, n_rows: usize, n_cols: usize },
    #[error("position ({row}, {col}) is covered by a header cell")]
    IsHeaderCell { row: usize, col: usize },
    #[error("position ({row}, {col}) is not covered by any cell")]
    Uncovered { row: usize, col: usize },
}

/// Address of one cell: the provenance carried by sentences and chunks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellRef {
    pub table_id: String,
    pub row: usize,
    pub col: usize,
}

impl CellRef {
    pub fn new(table_id: impl Into<String>, row: usize, col: usize) -> CellRef {
        CellRef { table_id: table_id.into(), row, col }
    }
}

/// Where a table came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRef {
    pub doc_id: String,
    pub page_index: usize,
    pub region_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
    pub row_span: usize,
    pub col_span: usize,
    pub raw_text: String,
    pub parsed: Option<MoneyValue>,
}

impl Cell {
    /// Builds a cell and parses its text as money when it looks like money.
    pub fn new(row: usize, col: usize, row_span: usize, col_span: usize, raw_text: impl Into<String>) -> Cell {
        let raw_text = raw_text.into();
        let parsed = parse_money(&raw_text).ok();
        Cell { row, col, row_span, col_span, raw_text, parsed }
    }

    pub fn single(row: usize, col: usize, raw_text: impl Into<String>) -> Cell {
        Cell::new(row, col, 1, 1, raw_text)
    }

    pub fn covers(&self, row: usize, col: usize) -> bool {
        row >= self.row && row < self.row + self.row_span && col >= self.col && col < self.col + self.col_span
    }

    /// Canonical value text: the money rendering when parsed, raw text otherwise.
    pub fn value_text(&self) -> String {
        match &self.parsed {
            Some(v) => v.render(),
            None => self.raw_text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableGrid {
    pub table_id: String,
    pub caption: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub header_row_count: usize,
    pub header_col_count: usize,
    pub cells: Vec<Cell>,
    pub source: SourceRef,
}

/// Row and column header texts that apply to one data position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderPath {
    pub row_headers: Vec<String>,
    pub col_headers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Finding {
    /// Position covered by no cell.
    Gap { row: usize, col: usize },
    /// Position covered by more than one cell; `cells` are indices into `TableGrid::cells`.
    Overlap { row: usize, col: usize, cells: Vec<usize> },
    /// Cell (by index) extends past the grid or has a zero span.
    OutOfBounds { cell: usize },
    /// Header counts leave no data area.
    HeaderCount { header_rows: usize, header_cols: usize },
    /// Grid has a zero dimension.
    EmptyGrid,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.findings.is_empty() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.findings.iter().map(|x| format!("{x:?}")).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks coverage, overlaps and bounds. An empty report means the grid is valid.
pub fn validate_grid(grid: &TableGrid) -> ValidationReport {
    let mut findings = Vec::new();
    if grid.n_rows == 0 || grid.n_cols == 0 {
        findings.push(Finding::EmptyGrid);
        return ValidationReport { findings };
    }
    if grid.header_row_count >= grid.n_rows || grid.header_col_count >= grid.n_cols {
        findings.push(Finding::HeaderCount { header_rows: grid.header_row_count, header_cols: grid.header_col_count });
    }

    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); grid.n_rows * grid.n_cols];
    for (idx, cell) in grid.cells.iter().enumerate() {
        let in_bounds = cell.row_span >= 1
            && cell.col_span >= 1
            && cell.row + cell.row_span <= grid.n_rows
            && cell.col + cell.col_span <= grid.n_cols;
        if !in_bounds {
            findings.push(Finding::OutOfBounds { cell: idx });
        }
        let row_end = (cell.row + cell.row_span).min(grid.n_rows);
        let col_end = (cell.col + cell.col_span).min(grid.n_cols);
        for r in cell.row..row_end {
            for c in cell.col..col_end {
                owners[r * grid.n_cols + c].push(idx);
            }
        }
    }
    for r in 0..grid.n_rows {
        for c in 0..grid.n_cols {
            let o = &owners[r * grid.n_cols + c];
            match o.len() {
                0 => findings.push(Finding::Gap { row: r, col: c }),
                1 => {}
                _ => findings.push(Finding::Overlap { row: r, col: c, cells: o.clone() }),
            }
        }
    }
    ValidationReport { findings }
}

impl TableGrid {
    pub fn validate(&self) -> ValidationReport {
        validate_grid(self)
    }

    /// Index of the cell covering `(row, col)`.
    pub fn cell_index_at(&self, row: usize, col: usize) -> Option<usize> {
        self.cells.iter().position(|c| c.covers(row, col))
    }

    pub fn cell_at(&self, row: usize, col: usize) -> Option<&Cell> {
        self.cell_index_at(row, col).map(|i| &self.cells[i])
    }

    pub fn is_header_cell(&self, cell: &Cell) -> bool {
        cell.row < self.header_row_count || cell.col < self.header_col_count
    }

    /// Data cells in row-major order of their anchor position.
    pub fn data_cells(&self) -> Vec<&Cell> {
        let mut cells: Vec<&Cell> = self.cells.iter().filter(|c| !self.is_header_cell(c)).collect();
        cells.sort_by_key(|c| (c.row, c.col));
        cells
    }

    pub fn data_cell_count(&self) -> usize {
        self.cells.iter().filter(|c| !self.is_header_cell(c)).count()
    }

    /// Header texts for the data position `(row, col)`.
    ///
    /// Row headers are read left to right across the header columns of `row`,
    /// column headers top to bottom down the header rows of `col`. A header
    /// cell spanning several lines is reported for each line it covers, once
    /// per path.
    pub fn header_path(&self, row: usize, col: usize) -> Result<HeaderPath, TableError> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(TableError::OutOfBounds { row, col, n_rows: self.n_rows, n_cols: self.n_cols });
        }
        let idx = self.cell_index_at(row, col).ok_or(TableError::Uncovered { row, col })?;
        if self.is_header_cell(&self.cells[idx]) {
            return Err(TableError::IsHeaderCell { row, col });
        }

        let mut row_headers = Vec::new();
        let mut last = None;
        for c in 0..self.header_col_count {
            if let Some(i) = self.cell_index_at(row, c) {
                if last != Some(i) {
                    row_headers.push(self.cells[i].raw_text.clone());
                    last = Some(i);
                }
            }
        }
        let mut col_headers = Vec::new();
        let mut last = None;
        for r in 0..self.header_row_count {
            if let Some(i) = self.cell_index_at(r, col) {
                if last != Some(i) {
                    col_headers.push(self.cells[i].raw_text.clone());
                    last = Some(i);
                }
            }
        }
        Ok(HeaderPath { row_headers, col_headers })
    }
}

/// Free-function form of [`TableGrid::header_path`].
pub fn header_path(grid: &TableGrid, row: usize, col: usize) -> Result<HeaderPath, TableError> {
    grid.header_path(row, col)
}
