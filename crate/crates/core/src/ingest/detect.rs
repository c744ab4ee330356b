//! Ruled-table detection with projection profiles.
//!
//! The page is split into 8-connected ink components. Within each component a
//! pixel row whose ink covers at least `line_threshold` of the component width
//! is part of a horizontal rule (columns likewise for vertical rules); rows
//! closer than `min_separation` belong to the same rule. A component is a
//! table when it has at least three horizontal and two vertical rules and
//! every rule crossing carries ink.

use std::collections::VecDeque;

use super::{Bbox, PageRaster, TableRegion};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectParams {
    pub line_threshold: f64,
    pub min_separation: usize,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams { line_threshold: 0.8, min_separation: 8 }
    }
}

/// One connected ink component, as a mask over its bounding box.
pub(crate) struct Component {
    pub bbox: Bbox,
    mask: Vec<bool>,
}

impl Component {
    pub fn ink(&self, x: usize, y: usize) -> bool {
        x >= self.bbox.x0
            && y >= self.bbox.y0
            && x < self.bbox.x1
            && y < self.bbox.y1
            && self.mask[(y - self.bbox.y0) * self.bbox.width() + (x - self.bbox.x0)]
    }
}

/// Inclusive pixel span of one rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Rule {
    pub first: usize,
    pub last: usize,
}

pub(crate) fn components(raster: &PageRaster, within: Bbox) -> Vec<Component> {
    let (w, h) = (raster.width, raster.height);
    let x_end = within.x1.min(w);
    let y_end = within.y1.min(h);
    let mut label = vec![usize::MAX; w * h];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for y in within.y0..y_end {
        for x in within.x0..x_end {
            if !raster.ink(x, y) || label[y * w + x] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut pixels = Vec::new();
            let mut bbox = Bbox { x0: x, y0: y, x1: x + 1, y1: y + 1 };
            label[y * w + x] = id;
            queue.push_back((x, y));
            while let Some((cx, cy)) = queue.pop_front() {
                pixels.push((cx, cy));
                bbox.x0 = bbox.x0.min(cx);
                bbox.y0 = bbox.y0.min(cy);
                bbox.x1 = bbox.x1.max(cx + 1);
                bbox.y1 = bbox.y1.max(cy + 1);
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let nx = cx as i64 + dx;
                        let ny = cy as i64 + dy;
                        if nx < within.x0 as i64 || ny < within.y0 as i64 || nx >= x_end as i64 || ny >= y_end as i64 {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if raster.ink(nx, ny) && label[ny * w + nx] == usize::MAX {
                            label[ny * w + nx] = id;
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
            let mut mask = vec![false; bbox.width() * bbox.height()];
            for (px, py) in pixels {
                mask[(py - bbox.y0) * bbox.width() + (px - bbox.x0)] = true;
            }
            out.push(Component { bbox, mask });
        }
    }
    out
}

/// Groups sorted positions into rules; positions closer than `min_sep` to the
/// previous one extend the current rule.
pub(crate) fn group_rules(positions: impl IntoIterator<Item = usize>, min_sep: usize) -> Vec<Rule> {
    let mut rules: Vec<Rule> = Vec::new();
    for p in positions {
        match rules.last_mut() {
            Some(r) if p - r.last < min_sep.max(1) => r.last = p,
            _ => rules.push(Rule { first: p, last: p }),
        }
    }
    rules
}

fn full_rules(c: &Component, params: &DetectParams) -> (Vec<Rule>, Vec<Rule>) {
    let b = c.bbox;
    let need_w = params.line_threshold * b.width() as f64;
    let need_h = params.line_threshold * b.height() as f64;
    let rows = (b.y0..b.y1).filter(|&y| (b.x0..b.x1).filter(|&x| c.ink(x, y)).count() as f64 >= need_w);
    let cols = (b.x0..b.x1).filter(|&x| (b.y0..b.y1).filter(|&y| c.ink(x, y)).count() as f64 >= need_h);
    (group_rules(rows, params.min_separation), group_rules(cols, params.min_separation))
}

fn crossing_has_ink(c: &Component, h: Rule, v: Rule) -> bool {
    (h.first..=h.last).any(|y| (v.first..=v.last).any(|x| c.ink(x, y)))
}

/// Finds ruled tables; regions are ordered top to bottom, then left to right,
/// and have `page_index` 0 and no grid.
pub fn detect_tables(raster: &PageRaster, params: &DetectParams) -> Vec<TableRegion> {
    let page = Bbox { x0: 0, y0: 0, x1: raster.width, y1: raster.height };
    let mut found: Vec<Bbox> = components(raster, page)
        .into_iter()
        .filter(|c| {
            let (h, v) = full_rules(c, params);
            h.len() >= 3 && v.len() >= 2 && h.iter().all(|&hr| v.iter().all(|&vr| crossing_has_ink(c, hr, vr)))
        })
        .map(|c| c.bbox)
        .collect();
    found.sort_by_key(|b| (b.y0, b.x0));
    found
        .into_iter()
        .enumerate()
        .map(|(i, bbox)| TableRegion { region_id: format!("r{i}"), page_index: 0, bbox, grid: None })
        .collect()
}
