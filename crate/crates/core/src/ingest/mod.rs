//! Documents, page rasters and table regions.
//!
//! Tables are located either from an annotation manifest or by a ruled-line
//! detector working on binarized page rasters. Recognized lattices are turned
//! into [`TableGrid`]s with cell text supplied by a [`CellLabels`] oracle.

mod bundle;
mod detect;
mod raster;
mod recognize;
mod render;
mod split;

pub use bundle::{load_document, DocumentBundle, RasterEncoding};
pub use detect::{detect_tables, DetectParams};
pub use raster::PageRaster;
pub use recognize::{recognize_grid, CellLabels};
pub use render::{draw_grid, render_page, render_table, table_size, RenderParams};
pub use split::{split_document, split_document_with, SplitDocument};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tablemodel::{ManifestError, TableGrid};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("annotation does not fit the document: {0}")]
    AnnotationMismatch(String),
    #[error("region {region_id}: rules do not form a lattice: {reason}")]
    NonLattice { region_id: String, reason: String },
    #[error("invalid raster: {0}")]
    Raster(String),
    #[error("invalid PGM: {0}")]
    Pgm(String),
    #[error("invalid document bundle: {0}")]
    Bundle(String),
    #[error("document {0:?} has no pages")]
    NoPages(String),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bbox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Bbox {
    pub fn width(&self) -> usize {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> usize {
        self.y1.saturating_sub(self.y0)
    }

    pub fn contains(&self, other: &Bbox) -> bool {
        self.x0 <= other.x0 && self.y0 <= other.y0 && other.x1 <= self.x1 && other.y1 <= self.y1
    }

    pub fn is_proper(&self) -> bool {
        self.x0 < self.x1 && self.y0 < self.y1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Inline,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageContent {
    pub page_index: usize,
    /// Text blocks in reading order.
    pub prose: Vec<String>,
    pub raster: Option<PageRaster>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentSource {
    pub doc_id: String,
    pub pages: Vec<PageContent>,
    pub origin: Origin,
}

impl DocumentSource {
    pub fn page(&self, page_index: usize) -> Option<&PageContent> {
        self.pages.iter().find(|p| p.page_index == page_index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRegion {
    pub region_id: String,
    pub page_index: usize,
    pub bbox: Bbox,
    /// Present for annotated or recognized regions.
    pub grid: Option<TableGrid>,
}
