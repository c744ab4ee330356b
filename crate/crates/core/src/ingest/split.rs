use std::collections::BTreeSet;

use crate::tablemodel::{ManifestBlock, SourceRef};

use super::{detect_tables, Bbox, DetectParams, DocumentSource, IngestError, TableRegion};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitDocument {
    /// All prose blocks, page by page, in reading order.
    pub prose: Vec<String>,
    pub regions: Vec<TableRegion>,
}

pub fn split_document(doc: &DocumentSource, annotations: Option<&[ManifestBlock]>) -> Result<SplitDocument, IngestError> {
    split_document_with(doc, annotations, &DetectParams::default())
}

/// Separates prose from tables.
///
/// Annotated regions are returned with their grids, and their source set to
/// this document. Pages that carry no annotation but have a raster are run
/// through the detector; detected regions have no grid.
pub fn split_document_with(
    doc: &DocumentSource,
    annotations: Option<&[ManifestBlock]>,
    params: &DetectParams,
) -> Result<SplitDocument, IngestError> {
    if doc.pages.is_empty() {
        return Err(IngestError::NoPages(doc.doc_id.clone()));
    }
    let mut pages: Vec<_> = doc.pages.iter().collect();
    pages.sort_by_key(|p| p.page_index);
    let prose = pages.iter().flat_map(|p| p.prose.iter().cloned()).collect();

    let mut regions = Vec::new();
    let mut annotated_pages = BTreeSet::new();
    for block in annotations.unwrap_or_default() {
        let region = block.region.ok_or_else(|| {
            IngestError::AnnotationMismatch(format!("table {:?} has no region line", block.grid.table_id))
        })?;
        let page = doc.page(region.page).ok_or_else(|| {
            IngestError::AnnotationMismatch(format!(
                "line {}: table {:?} is on page {}, but document {:?} has pages {:?}",
                region.line,
                block.grid.table_id,
                region.page,
                doc.doc_id,
                doc.pages.iter().map(|p| p.page_index).collect::<Vec<_>>()
            ))
        })?;
        let (x0, y0, x1, y1) = region.bbox;
        let bbox = Bbox { x0, y0, x1, y1 };
        if !bbox.is_proper() {
            return Err(IngestError::AnnotationMismatch(format!("line {}: empty region {bbox:?}", region.line)));
        }
        if let Some(r) = &page.raster {
            if x1 > r.width || y1 > r.height {
                return Err(IngestError::AnnotationMismatch(format!(
                    "line {}: region {bbox:?} lies outside the {}x{} page",
                    region.line, r.width, r.height
                )));
            }
        }
        let ordinal = regions.iter().filter(|r: &&TableRegion| r.page_index == region.page).count();
        let region_id = format!("p{}-r{ordinal}", region.page);
        let mut grid = block.grid.clone();
        grid.source = SourceRef { doc_id: doc.doc_id.clone(), page_index: region.page, region_id: region_id.clone() };
        annotated_pages.insert(region.page);
        regions.push(TableRegion { region_id, page_index: region.page, bbox, grid: Some(grid) });
    }

    for page in pages {
        if annotated_pages.contains(&page.page_index) {
            continue;
        }
        let Some(raster) = &page.raster else { continue };
        for (n, mut r) in detect_tables(raster, params).into_iter().enumerate() {
            r.page_index = page.page_index;
            r.region_id = format!("p{}-d{n}", page.page_index);
            regions.push(r);
        }
    }
    regions.sort_by_key(|r| (r.page_index, r.bbox.y0, r.bbox.x0));
    Ok(SplitDocument { prose, regions })
}
