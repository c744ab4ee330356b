use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::tablemodel::{MoneyValue, TableGrid};

use super::LinearizedTable;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverageFinding {
    Missing { row: usize, col: usize },
    Duplicate { row: usize, col: usize, count: usize },
    ValueMismatch { row: usize, col: usize, expected: Option<MoneyValue>, found: Option<MoneyValue> },
    /// Sentence not attributable to a data cell of this table.
    Extra { text: String },
    TableMismatch { expected: String, found: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub findings: Vec<CoverageFinding>,
}

impl CoverageReport {
    pub fn is_covered(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Compares a linearization against its grid cell by cell.
pub fn verify_coverage(grid: &TableGrid, lin: &LinearizedTable) -> CoverageReport {
    let mut findings = Vec::new();
    if grid.table_id != lin.table_id {
        findings.push(CoverageFinding::TableMismatch { expected: grid.table_id.clone(), found: lin.table_id.clone() });
    }

    let data: BTreeMap<(usize, usize), Option<MoneyValue>> =
        grid.data_cells().into_iter().map(|c| ((c.row, c.col), c.parsed)).collect();
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();

    for s in &lin.sentences {
        let p = &s.provenance;
        let key = (p.row, p.col);
        match data.get(&key) {
            Some(expected) if p.table_id == grid.table_id => {
                *counts.entry(key).or_default() += 1;
                if *expected != s.value {
                    findings.push(CoverageFinding::ValueMismatch { row: p.row, col: p.col, expected: *expected, found: s.value });
                }
            }
            _ => findings.push(CoverageFinding::Extra { text: s.text.clone() }),
        }
    }
    findings.extend(lin.extras.iter().map(|t| CoverageFinding::Extra { text: t.clone() }));

    for &(row, col) in data.keys() {
        match counts.get(&(row, col)).copied().unwrap_or(0) {
            0 => findings.push(CoverageFinding::Missing { row, col }),
            1 => {}
            count => findings.push(CoverageFinding::Duplicate { row, col, count }),
        }
    }
    CoverageReport { findings }
}
