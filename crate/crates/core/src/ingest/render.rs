use crate::tablemodel::TableGrid;

use super::{Bbox, PageRaster};

/// Geometry for drawing ruled tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderParams {
    pub cell_width: usize,
    pub cell_height: usize,
    /// Rule thickness in pixels.
    pub rule: usize,
    pub margin: usize,
    /// Vertical gap between stacked tables.
    pub gap: usize,
    /// Draw a solid bar inside each non-empty cell as a stand-in for text.
    pub text_bars: bool,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams { cell_width: 96, cell_height: 28, rule: 2, margin: 24, gap: 50, text_bars: true }
    }
}

/// Pixel size of a rendered grid.
pub fn table_size(grid: &TableGrid, p: &RenderParams) -> (usize, usize) {
    (grid.n_cols * p.cell_width + p.rule, grid.n_rows * p.cell_height + p.rule)
}

/// Draws the border of every cell of `grid` with its top-left corner at
/// `(x, y)` and returns the drawn bounding box.
pub fn draw_grid(raster: &mut PageRaster, grid: &TableGrid, x: usize, y: usize, p: &RenderParams) -> Bbox {
    let t = p.rule;
    for cell in &grid.cells {
        let x0 = x + cell.col * p.cell_width;
        let y0 = y + cell.row * p.cell_height;
        let x1 = x + (cell.col + cell.col_span) * p.cell_width;
        let y1 = y + (cell.row + cell.row_span) * p.cell_height;
        raster.fill(x0, y0, x1 + t, y0 + t, true);
        raster.fill(x0, y1, x1 + t, y1 + t, true);
        raster.fill(x0, y0, x0 + t, y1 + t, true);
        raster.fill(x1, y0, x1 + t, y1 + t, true);
        if p.text_bars && !cell.raw_text.trim().is_empty() {
            let pad = t + 5;
            let inner_w = (x1 - x0).saturating_sub(2 * pad);
            let bar_w = (cell.raw_text.chars().count() * 6).min(inner_w);
            let bar_h = 8.min((y1 - y0).saturating_sub(2 * pad));
            let by = y0 + (y1 - y0 + t) / 2 - bar_h / 2;
            raster.fill(x0 + pad, by, x0 + pad + bar_w, by + bar_h, true);
        }
    }
    let (w, h) = table_size(grid, p);
    Bbox { x0: x, y0: y, x1: x + w, y1: y + h }
}

/// Renders grids stacked top to bottom on one page, separated by `gap`.
/// Returns the page and the bounding box of each table.
pub fn render_page(grids: &[&TableGrid], p: &RenderParams) -> (PageRaster, Vec<Bbox>) {
    let sizes: Vec<(usize, usize)> = grids.iter().map(|g| table_size(g, p)).collect();
    let width = sizes.iter().map(|s| s.0).max().unwrap_or(0) + 2 * p.margin;
    let height = sizes.iter().map(|s| s.1).sum::<usize>() + p.gap * grids.len().saturating_sub(1) + 2 * p.margin;
    let mut raster = PageRaster::blank(width.max(1), height.max(1));
    let mut boxes = Vec::new();
    let mut y = p.margin;
    for (g, (_, h)) in grids.iter().zip(&sizes) {
        boxes.push(draw_grid(&mut raster, g, p.margin, y, p));
        y += h + p.gap;
    }
    (raster, boxes)
}

pub fn render_table(grid: &TableGrid, p: &RenderParams) -> (PageRaster, Bbox) {
    let (raster, boxes) = render_page(&[grid], p);
    (raster, boxes[0])
}
