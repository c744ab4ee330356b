//! JSON document bundles.
//!
//! ```json
//! {
//!   "doc_id": "benefits-guide",
//!   "pages": [
//!     {"page_index": 0, "prose": ["..."], "raster": {"path": "page-0.pgm"}},
//!     {"page_index": 1, "prose": ["..."], "raster": {"pgm_base64": "UDUK..."}},
//!     {"page_index": 2, "prose": ["..."], "raster": null}
//!   ],
//!   "annotations": "region 0 24 24 602 390\ntable_id: ...\n"
//! }
//! ```
//!
//! Raster paths are resolved against the bundle's directory.

use std::path::{Path, PathBuf};

use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::tablemodel::{blocks_to_manifest, parse_manifest_blocks, ManifestBlock, RegionLine, TableGrid};

use super::{render_table, DocumentSource, IngestError, Origin, PageContent, PageRaster, RenderParams};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleJson {
    doc_id: String,
    pages: Vec<PageJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    annotations: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PageJson {
    page_index: usize,
    #[serde(default)]
    prose: Vec<String>,
    #[serde(default)]
    raster: Option<RasterJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RasterJson {
    Path { path: String },
    Inline { pgm_base64: String },
}

/// How rasters are written into a bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RasterEncoding {
    Omit,
    Inline,
    /// File name per page, in page order; the caller writes the files.
    Paths(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentBundle {
    pub source: DocumentSource,
    pub annotations: Option<Vec<ManifestBlock>>,
}

impl DocumentBundle {
    /// A document with one page per table, each page holding the rendered
    /// table and an annotation for it.
    pub fn from_tables(doc_id: &str, grids: &[TableGrid], params: &RenderParams) -> DocumentBundle {
        let mut pages = Vec::with_capacity(grids.len());
        let mut blocks = Vec::with_capacity(grids.len());
        for (page, grid) in grids.iter().enumerate() {
            let (raster, b) = render_table(grid, params);
            pages.push(PageContent { page_index: page, prose: Vec::new(), raster: Some(raster) });
            blocks.push(ManifestBlock { region: Some(RegionLine { line: 0, page, bbox: (b.x0, b.y0, b.x1, b.y1) }), grid: grid.clone() });
        }
        DocumentBundle {
            source: DocumentSource { doc_id: doc_id.to_string(), pages, origin: Origin::Inline },
            annotations: Some(blocks),
        }
    }

    pub fn from_json(text: &str, base_dir: Option<&Path>) -> Result<DocumentBundle, IngestError> {
        let json: BundleJson = serde_json::from_str(text).map_err(|e| IngestError::Bundle(e.to_string()))?;
        if json.doc_id.trim().is_empty() {
            return Err(IngestError::Bundle("doc_id must not be empty".into()));
        }
        let mut pages = Vec::with_capacity(json.pages.len());
        for p in json.pages {
            let raster = match p.raster {
                None => None,
                Some(RasterJson::Inline { pgm_base64 }) => {
                    let bytes = base64::engine::general_purpose::STANDARD
                        .decode(pgm_base64.trim())
                        .map_err(|e| IngestError::Bundle(format!("page {}: {e}", p.page_index)))?;
                    Some(PageRaster::from_pgm(&bytes)?)
                }
                Some(RasterJson::Path { path }) => {
                    let full: PathBuf = match base_dir {
                        Some(dir) => dir.join(&path),
                        None => PathBuf::from(&path),
                    };
                    let bytes = std::fs::read(&full).map_err(|source| IngestError::Io { path: full.clone(), source })?;
                    Some(PageRaster::from_pgm(&bytes)?)
                }
            };
            pages.push(PageContent { page_index: p.page_index, prose: p.prose, raster });
        }
        let annotations = json.annotations.as_deref().map(parse_manifest_blocks).transpose()?;
        let origin = base_dir.map(|d| Origin::File(d.to_path_buf())).unwrap_or(Origin::Inline);
        Ok(DocumentBundle { source: DocumentSource { doc_id: json.doc_id, pages, origin }, annotations })
    }

    pub fn to_json(&self, rasters: &RasterEncoding) -> Result<String, IngestError> {
        let mut pages = Vec::new();
        for (i, p) in self.source.pages.iter().enumerate() {
            let raster = match (rasters, &p.raster) {
                (RasterEncoding::Omit, _) | (_, None) => None,
                (RasterEncoding::Inline, Some(r)) => {
                    Some(RasterJson::Inline { pgm_base64: base64::engine::general_purpose::STANDARD.encode(r.to_pgm()) })
                }
                (RasterEncoding::Paths(names), Some(_)) => {
                    let name = names.get(i).ok_or_else(|| IngestError::Bundle(format!("no raster file name for page {i}")))?;
                    Some(RasterJson::Path { path: name.clone() })
                }
            };
            pages.push(PageJson { page_index: p.page_index, prose: p.prose.clone(), raster });
        }
        let json = BundleJson {
            doc_id: self.source.doc_id.clone(),
            pages,
            annotations: self.annotations.as_deref().map(blocks_to_manifest),
        };
        Ok(serde_json::to_string_pretty(&json).expect("bundle serializes") + "\n")
    }
}

/// Reads a document from disk: a `.json` bundle, or a table manifest that
/// becomes a document named after the file, one rendered page per table.
pub fn load_document(path: &Path) -> Result<DocumentBundle, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        return DocumentBundle::from_json(&text, Some(path.parent().unwrap_or(Path::new("."))));
    }
    let grids: Vec<TableGrid> = parse_manifest_blocks(&text)?.into_iter().map(|b| b.grid).collect();
    if grids.is_empty() {
        return Err(IngestError::NoPages(path.display().to_string()));
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let doc_id: String = stem.split('.').next().unwrap_or_default().chars().map(|c| if c.is_whitespace() { '-' } else { c }).collect();
    let doc_id = if doc_id.is_empty() { "document".to_string() } else { doc_id };
    Ok(DocumentBundle::from_tables(&doc_id, &grids, &RenderParams::default()))
}
