use std::collections::BTreeMap;

use crate::tablemodel::{Cell, SourceRef, TableGrid};

use super::detect::{components, group_rules, Component, Rule};
use super::{DetectParams, IngestError, PageRaster, TableRegion};

/// Cell text and table metadata keyed by cell anchor, standing in for OCR.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CellLabels {
    pub table_id: String,
    pub caption: String,
    pub header_row_count: usize,
    pub header_col_count: usize,
    /// Raw text by `(row, col)` of each cell's top-left position.
    pub texts: BTreeMap<(usize, usize), String>,
}

impl CellLabels {
    pub fn from_grid(grid: &TableGrid) -> CellLabels {
        CellLabels {
            table_id: grid.table_id.clone(),
            caption: grid.caption.clone(),
            header_row_count: grid.header_row_count,
            header_col_count: grid.header_col_count,
            texts: grid.cells.iter().map(|c| ((c.row, c.col), c.raw_text.clone())).collect(),
        }
    }
}

/// Share of a separator segment that must carry ink for the separator to count.
const SEGMENT_PRESENT: f64 = 0.5;

fn longest_run(mut ink: impl Iterator<Item = bool>) -> usize {
    let (mut best, mut cur) = (0, 0);
    for on in ink.by_ref() {
        cur = if on { cur + 1 } else { 0 };
        best = best.max(cur);
    }
    best
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Recovers the cell structure of a detected region.
///
/// Rules are the pixel rows (columns) of the region's lattice that contain a
/// horizontal (vertical) ink run of at least `min_separation` pixels. Between
/// two neighbouring lattice positions the shared rule segment is a separator
/// when at least half of it is inked; positions without a separator are merged
/// into one spanning cell. Merged areas must be rectangles, the outer border
/// must be complete, and the resulting cell anchors must be exactly the
/// anchors named by `labels`.
pub fn recognize_grid(raster: &PageRaster, region: &TableRegion, labels: &CellLabels) -> Result<TableGrid, IngestError> {
    recognize_with(raster, region, labels, &DetectParams::default())
}

pub(crate) fn recognize_with(
    raster: &PageRaster,
    region: &TableRegion,
    labels: &CellLabels,
    params: &DetectParams,
) -> Result<TableGrid, IngestError> {
    let fail = |reason: String| IngestError::NonLattice { region_id: region.region_id.clone(), reason };
    let lattice: Component = components(raster, region.bbox)
        .into_iter()
        .max_by_key(|c| (c.bbox.width() * c.bbox.height(), std::cmp::Reverse((c.bbox.y0, c.bbox.x0))))
        .ok_or_else(|| fail("region contains no ink".into()))?;
    let b = lattice.bbox;
    let min_run = params.min_separation.max(2);

    let h_rows = (b.y0..b.y1).filter(|&y| longest_run((b.x0..b.x1).map(|x| lattice.ink(x, y))) >= min_run);
    let v_cols = (b.x0..b.x1).filter(|&x| longest_run((b.y0..b.y1).map(|y| lattice.ink(x, y))) >= min_run);
    let h = group_rules(h_rows, params.min_separation);
    let v = group_rules(v_cols, params.min_separation);
    if h.len() < 2 || v.len() < 2 {
        return Err(fail(format!("found {} horizontal and {} vertical rules", h.len(), v.len())));
    }
    if h[0].first != b.y0 || h[h.len() - 1].last + 1 != b.y1 || v[0].first != b.x0 || v[v.len() - 1].last + 1 != b.x1 {
        return Err(fail("outer rules do not enclose the lattice".into()));
    }
    let (n_rows, n_cols) = (h.len() - 1, v.len() - 1);

    let inked = |ys: (usize, usize), xs: (usize, usize), horizontal: bool| -> bool {
        // Fraction of positions along the segment that have ink across the rule.
        let (along, across) = if horizontal { (xs, ys) } else { (ys, xs) };
        if along.1 < along.0 {
            return false;
        }
        let total = along.1 - along.0 + 1;
        let hits = (along.0..=along.1)
            .filter(|&p| {
                (across.0..=across.1).any(|q| if horizontal { lattice.ink(p, q) } else { lattice.ink(q, p) })
            })
            .count();
        hits as f64 >= SEGMENT_PRESENT * total as f64
    };
    let interior = |rules: &[Rule], i: usize| (rules[i].last + 1, rules[i + 1].first.saturating_sub(1));
    // Separator below (r, c): horizontal rule r+1 over column c's interior.
    let below = |r: usize, c: usize| inked((h[r + 1].first, h[r + 1].last), interior(&v, c), true);
    // Separator right of (r, c): vertical rule c+1 over row r's interior.
    let right = |r: usize, c: usize| inked(interior(&h, r), (v[c + 1].first, v[c + 1].last), false);

    for c in 0..n_cols {
        let top = inked((h[0].first, h[0].last), interior(&v, c), true);
        let bottom = inked((h[n_rows].first, h[n_rows].last), interior(&v, c), true);
        if !top || !bottom {
            return Err(fail(format!("outer border broken above or below column {c}")));
        }
    }
    for r in 0..n_rows {
        let left = inked(interior(&h, r), (v[0].first, v[0].last), false);
        let rightmost = inked(interior(&h, r), (v[n_cols].first, v[n_cols].last), false);
        if !left || !rightmost {
            return Err(fail(format!("outer border broken beside row {r}")));
        }
    }

    let idx = |r: usize, c: usize| r * n_cols + c;
    let mut parent: Vec<usize> = (0..n_rows * n_cols).collect();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if c + 1 < n_cols && !right(r, c) {
                let (a, bb) = (find(&mut parent, idx(r, c)), find(&mut parent, idx(r, c + 1)));
                parent[a] = bb;
            }
            if r + 1 < n_rows && !below(r, c) {
                let (a, bb) = (find(&mut parent, idx(r, c)), find(&mut parent, idx(r + 1, c)));
                parent[a] = bb;
            }
        }
    }
    let mut groups: BTreeMap<usize, (usize, usize, usize, usize, usize)> = BTreeMap::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            let root = find(&mut parent, idx(r, c));
            let g = groups.entry(root).or_insert((r, c, r, c, 0));
            g.0 = g.0.min(r);
            g.1 = g.1.min(c);
            g.2 = g.2.max(r);
            g.3 = g.3.max(c);
            g.4 += 1;
        }
    }
    let mut cells = Vec::new();
    for (root, &(r0, c0, r1, c1, count)) in &groups {
        if (r1 - r0 + 1) * (c1 - c0 + 1) != count {
            return Err(fail(format!("merged area at ({r0}, {c0}) is not a rectangle")));
        }
        for r in r0..=r1 {
            for c in c0..=c1 {
                if find(&mut parent, idx(r, c)) != *root {
                    return Err(fail(format!("merged area at ({r0}, {c0}) is not a rectangle")));
                }
                if (c < c1 && right(r, c)) || (r < r1 && below(r, c)) {
                    return Err(fail(format!("stray rule inside merged area at ({r0}, {c0})")));
                }
            }
        }
        let text = labels.texts.get(&(r0, c0)).ok_or_else(|| fail(format!("no label for cell anchored at ({r0}, {c0})")))?;
        cells.push(Cell::new(r0, c0, r1 - r0 + 1, c1 - c0 + 1, text.clone()));
    }
    if cells.len() != labels.texts.len() {
        let anchors: std::collections::BTreeSet<(usize, usize)> = cells.iter().map(|c| (c.row, c.col)).collect();
        let orphan = labels.texts.keys().find(|k| !anchors.contains(k));
        return Err(fail(format!("labels name cell {orphan:?} that the lattice does not have")));
    }
    cells.sort_by_key(|c| (c.row, c.col));
    let grid = TableGrid {
        table_id: labels.table_id.clone(),
        caption: labels.caption.clone(),
        n_rows,
        n_cols,
        header_row_count: labels.header_row_count,
        header_col_count: labels.header_col_count,
        cells,
        source: SourceRef { doc_id: String::new(), page_index: region.page_index, region_id: region.region_id.clone() },
    };
    let report = grid.validate();
    if !report.is_valid() {
        return Err(fail(format!("recognized grid is invalid: {report}")));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{detect_tables, render_table, RenderParams};
    use crate::tablemodel::grid_from_manifest;

    fn spanned() -> TableGrid {
        grid_from_manifest(
            "table_id: t\ncaption: c\nn_rows: 4\nn_cols: 3\nheader_rows: 2\n\
             cell 0 0 2 1 Month\ncell 0 1 1 2 Tier\ncell 1 1 1 1 A\ncell 1 2 1 1 B\n\
             cell 2 0 1 1 January\ncell 2 1 1 1 $1.00\ncell 2 2 1 1 $2.00\n\
             cell 3 0 1 1 February\ncell 3 1 1 1 $3.00\ncell 3 2 1 1 $4.00\n",
        )
        .unwrap()
    }

    fn same_structure(a: &TableGrid, b: &TableGrid) -> bool {
        let mut ac = a.cells.clone();
        let mut bc = b.cells.clone();
        ac.sort_by_key(|c| (c.row, c.col));
        bc.sort_by_key(|c| (c.row, c.col));
        a.n_rows == b.n_rows && a.n_cols == b.n_cols && ac == bc
    }

    #[test]
    fn two_by_two_from_three_rules() {
        let mut r = PageRaster::blank(60, 60);
        for p in [10, 30, 50] {
            r.fill(10, p, 52, p + 2, true);
            r.fill(p, 10, p + 2, 52, true);
        }
        let regions = detect_tables(&r, &DetectParams::default());
        assert_eq!(regions.len(), 1);
        let labels = CellLabels {
            table_id: "t".into(),
            texts: [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().map(|k| (k, "x".to_string())).collect(),
            ..Default::default()
        };
        let g = recognize_grid(&r, &regions[0], &labels).unwrap();
        assert_eq!((g.n_rows, g.n_cols, g.cells.len()), (2, 2, 4));
    }

    #[test]
    fn spans_round_trip() {
        let g = spanned();
        let (raster, _) = render_table(&g, &RenderParams::default());
        let regions = detect_tables(&raster, &DetectParams::default());
        assert_eq!(regions.len(), 1);
        let back = recognize_grid(&raster, &regions[0], &CellLabels::from_grid(&g)).unwrap();
        assert!(same_structure(&back, &g));
        assert_eq!(back.header_row_count, 2);
    }

    #[test]
    fn erased_interior_segment_is_rejected() {
        let g = spanned();
        let p = RenderParams::default();
        let (mut raster, bbox) = render_table(&g, &p);
        let region = detect_tables(&raster, &DetectParams::default()).remove(0);
        // Erase the vertical rule between the two data cells of the last row.
        let x = bbox.x0 + 2 * p.cell_width;
        let y0 = bbox.y0 + 3 * p.cell_height + p.rule;
        raster.fill(x, y0, x + p.rule, y0 + p.cell_height - p.rule, false);
        let err = recognize_grid(&raster, &region, &CellLabels::from_grid(&g)).unwrap_err();
        assert!(matches!(err, IngestError::NonLattice { .. }), "{err}");
    }
}
