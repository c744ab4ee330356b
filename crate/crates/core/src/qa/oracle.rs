use crate::tablemodel::{CellRef, MoneyValue, TableGrid};

use super::{facet_mentions, QaError, QueryFacets};

/// The unique data cell whose row headers name the month, whose column
/// headers name the tier and whose table caption names the benefit, found
/// by scanning every cell of every grid.
pub fn oracle_cell<'a>(grids: &'a [TableGrid], facets: &QueryFacets) -> Result<Option<(&'a TableGrid, CellRef)>, QaError> {
    let (Some(month), Some(tier), Some(benefit)) = (facets.month, facets.tier, facets.benefit) else {
        return Err(QaError::IncompleteFacets(*facets));
    };
    let mut found = Vec::new();
    for grid in grids {
        let caption = facet_mentions(&grid.caption);
        if caption.benefits.len() != 1 || !caption.benefits.contains(&benefit) {
            continue;
        }
        for cell in grid.data_cells() {
            let Ok(path) = grid.header_path(cell.row, cell.col) else { continue };
            let rows = facet_mentions(&path.row_headers.join(" "));
            let cols = facet_mentions(&path.col_headers.join(" "));
            if rows.months.len() == 1 && rows.months.contains(&month) && cols.tiers.len() == 1 && cols.tiers.contains(&tier) {
                found.push((grid, CellRef::new(grid.table_id.clone(), cell.row, cell.col)));
            }
        }
    }
    match found.len() {
        0 => Ok(None),
        1 => Ok(found.pop()),
        _ => Err(QaError::AmbiguousFacets { facets: *facets, cells: found.into_iter().map(|(_, c)| c).collect() }),
    }
}

/// Parsed value of [`oracle_cell`]; absent when no cell matches or the cell
/// holds no amount.
pub fn oracle_answer(grids: &[TableGrid], facets: &QueryFacets) -> Result<Option<MoneyValue>, QaError> {
    Ok(oracle_cell(grids, facets)?.and_then(|(grid, r)| grid.cell_at(r.row, r.col).and_then(|c| c.parsed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qa::{Benefit, Month, Tier};
    use crate::tablemodel::grid_from_manifest;

    fn grid(id: &str, caption: &str) -> TableGrid {
        grid_from_manifest(&format!(
            "table_id: {id}\ncaption: {caption}\nn_rows: 3\nn_cols: 3\n\
             cell 0 0 1 1 Month\ncell 0 1 1 1 You only\ncell 0 2 1 1 You + family\n\
             cell 1 0 1 1 January\ncell 1 1 1 1 $250.00\ncell 1 2 1 1 $750.00\n\
             cell 2 0 1 1 February\ncell 2 1 1 1 $229.00\ncell 2 2 1 1 $688.00\n"
        ))
        .unwrap()
    }

    #[test]
    fn finds_the_cell() {
        let grids = [grid("ded", "network deductible"), grid("oop", "out-of-pocket maximum")];
        let f = QueryFacets::full(Month::February, Tier::YouFamily, Benefit::NetworkDeductible);
        assert_eq!(oracle_answer(&grids, &f).unwrap(), Some(MoneyValue::usd(68800)));
        let (_, cell) = oracle_cell(&grids, &f).unwrap().unwrap();
        assert_eq!(cell, CellRef::new("ded", 2, 2));
    }

    #[test]
    fn absent_month() {
        let grids = [grid("ded", "network deductible")];
        let f = QueryFacets::full(Month::March, Tier::YouOnly, Benefit::NetworkDeductible);
        assert_eq!(oracle_answer(&grids, &f).unwrap(), None);
    }

    #[test]
    fn duplicate_captions_are_ambiguous() {
        let grids = [grid("a", "network deductible"), grid("b", "network deductible")];
        let f = QueryFacets::full(Month::January, Tier::YouOnly, Benefit::NetworkDeductible);
        match oracle_answer(&grids, &f) {
            Err(QaError::AmbiguousFacets { cells, .. }) => assert_eq!(cells.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partial_facets_rejected() {
        let f = QueryFacets { month: Some(Month::January), ..Default::default() };
        assert!(matches!(oracle_answer(&[], &f), Err(QaError::IncompleteFacets(_))));
    }
}
