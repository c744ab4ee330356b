//! Seeded synthetic benefits corpus and random grids.
//!
//! The generated document has one page per benefit category. Each page holds
//! two prose blocks and one ruled table with a header row of coverage tiers and
//! a header column of months. Amounts are annual figures prorated by the month
//! coverage starts. Gold questions cover every (category, tier) pair and take
//! their expected values from the table oracle.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::eval::{write_gold, GoldQuery};
use crate::ingest::{render_table, Bbox, DocumentBundle, DocumentSource, Origin, PageContent, RasterEncoding, RenderParams};
use crate::qa::{extract_facets, oracle_answer, Benefit, Month, QaError, QueryFacets, Tier};
use crate::tablemodel::{blocks_to_manifest, tables_to_manifest, Cell, ManifestBlock, MoneyValue, RegionLine, SourceRef, TableGrid};

pub const DOC_ID: &str = "benefits-guide";

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("{what} must be between 1 and {max}, got {got}")]
    OutOfRange { what: &'static str, max: usize, got: usize },
    #[error("generated question {question:?} reads as {read:?}, not {meant:?}")]
    QuestionFacets { question: String, meant: QueryFacets, read: QueryFacets },
    #[error(transparent)]
    Oracle(#[from] QaError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixtureSpec {
    pub seed: u64,
    pub months: usize,
    pub tiers: usize,
    pub categories: usize,
    /// Minimum number of gold questions, reached when there are enough months.
    pub gold_target: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec { seed: 42, months: 12, tiers: 5, categories: 3, gold_target: 50 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub spec: FixtureSpec,
    /// Document with rasters and annotations.
    pub bundle: DocumentBundle,
    /// Tables in page order, sources filled in.
    pub grids: Vec<TableGrid>,
    pub gold: Vec<GoldQuery>,
}

fn dollars(d: i64) -> MoneyValue {
    MoneyValue::usd(d * 100)
}

/// Annual amount range and step, in dollars.
fn annual_range(b: Benefit) -> (i64, i64, i64) {
    match b {
        Benefit::HraContribution => (300, 1500, 50),
        Benefit::NetworkDeductible => (250, 3000, 250),
        Benefit::OutOfPocketMax => (1000, 6000, 250),
    }
}

/// Amount for coverage starting in month `m` (1-based), to the nearest dollar.
fn prorate(annual: i64, m: u32) -> i64 {
    (annual * i64::from(13 - m) * 2 + 12) / 24
}

fn benefit_grid(b: Benefit, tiers: &[Tier], months: &[Month], annual: &[i64], page: usize) -> TableGrid {
    let mut cells = vec![Cell::single(0, 0, "Month")];
    for (c, t) in tiers.iter().enumerate() {
        cells.push(Cell::single(0, c + 1, t.header()));
    }
    for (r, m) in months.iter().enumerate() {
        cells.push(Cell::single(r + 1, 0, m.name()));
        for (c, a) in annual.iter().enumerate() {
            cells.push(Cell::single(r + 1, c + 1, dollars(prorate(*a, m.number())).render()));
        }
    }
    TableGrid {
        table_id: b.label().to_string(),
        caption: b.caption().to_string(),
        n_rows: months.len() + 1,
        n_cols: tiers.len() + 1,
        header_row_count: 1,
        header_col_count: 1,
        cells,
        source: SourceRef { doc_id: DOC_ID.to_string(), page_index: page, region_id: format!("p{page}-r0") },
    }
}

fn prose_for(b: Benefit) -> Vec<String> {
    vec![
        format!(
            "This section lists the {} for each coverage tier. Amounts are prorated by the month in which coverage starts.",
            b.caption()
        ),
        "Contact the benefits office with questions about enrollment. Changes take effect on the first day of the next pay period."
            .to_string(),
    ]
}

fn benefit_phrases(b: Benefit) -> &'static [&'static str] {
    match b {
        Benefit::HraContribution => &["company HRA contribution", "HRA contribution"],
        Benefit::NetworkDeductible => &["network deductible", "deductible", "Network Deductible"],
        Benefit::OutOfPocketMax => &["out-of-pocket max", "out of pocket max", "out-of-pocket maximum", "out of pocket maximum"],
    }
}

fn tier_phrases(t: Tier) -> &'static [&'static str] {
    match t {
        Tier::YouOnly => &["yourself", "you only"],
        Tier::YouSpouse => &["you and your spouse"],
        Tier::YouPartner => &["you and your domestic partner", "you and your partner"],
        Tier::YouChild => &["you and your child", "you and your children"],
        Tier::YouFamily => &["you and your family"],
    }
}

fn question(rng: &mut ChaCha8Rng, m: Month, t: Tier, b: Benefit) -> String {
    let bp = benefit_phrases(b).choose(rng).expect("phrases");
    let tp = tier_phrases(t).choose(rng).expect("phrases");
    match rng.gen_range(0..3) {
        0 => format!("What is the {bp} for {tp} in {m}?"),
        1 => format!("What is {m} {bp} for {tp}?"),
        _ => format!("What is {m}'s {bp} for {tp}?"),
    }
}

fn check(what: &'static str, got: usize, max: usize) -> Result<(), FixtureError> {
    if got == 0 || got > max {
        return Err(FixtureError::OutOfRange { what, max, got });
    }
    Ok(())
}

pub fn generate_fixtures(spec: &FixtureSpec) -> Result<Fixture, FixtureError> {
    check("categories", spec.categories, Benefit::ALL.len())?;
    check("tiers", spec.tiers, Tier::ALL.len())?;
    check("months", spec.months, Month::ALL.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let benefits = &Benefit::ALL[..spec.categories];
    let tiers = &Tier::ALL[..spec.tiers];
    let months = &Month::ALL[..spec.months];
    let params = RenderParams::default();

    let mut grids = Vec::new();
    let mut pages = Vec::new();
    let mut blocks = Vec::new();
    for (page, &b) in benefits.iter().enumerate() {
        let (lo, hi, step) = annual_range(b);
        let annual: Vec<i64> = tiers.iter().map(|_| rng.gen_range(lo / step..=hi / step) * step).collect();
        let grid = benefit_grid(b, tiers, months, &annual, page);
        let (raster, bbox) = render_table(&grid, &params);
        let Bbox { x0, y0, x1, y1 } = bbox;
        blocks.push(ManifestBlock { region: Some(RegionLine { line: 0, page, bbox: (x0, y0, x1, y1) }), grid: grid.clone() });
        pages.push(PageContent { page_index: page, prose: prose_for(b), raster: Some(raster) });
        grids.push(grid);
    }

    let per_pair = spec.gold_target.div_ceil(benefits.len() * tiers.len()).clamp(1, months.len());
    let mut gold = Vec::new();
    for &b in benefits {
        for &t in tiers {
            let mut picked: Vec<usize> = index::sample(&mut rng, months.len(), per_pair).into_vec();
            picked.sort_unstable();
            for mi in picked {
                let m = months[mi];
                let facets = QueryFacets::full(m, t, b);
                let text = question(&mut rng, m, t, b);
                let read = extract_facets(&text);
                if read != facets {
                    return Err(FixtureError::QuestionFacets { question: text, meant: facets, read });
                }
                let expected = oracle_answer(&grids, &facets)?.expect("every generated cell holds an amount");
                gold.push(GoldQuery {
                    qid: format!("q{:03}", gold.len() + 1),
                    question: text,
                    facets,
                    expected,
                    category: b,
                });
            }
        }
    }

    let bundle = DocumentBundle {
        source: DocumentSource { doc_id: DOC_ID.to_string(), pages, origin: Origin::Inline },
        annotations: Some(blocks),
    };
    Ok(Fixture { spec: *spec, bundle, grids, gold })
}

impl Fixture {
    pub fn annotations_manifest(&self) -> String {
        blocks_to_manifest(self.bundle.annotations.as_deref().unwrap_or_default())
    }

    pub fn tables_manifest(&self) -> String {
        tables_to_manifest(&self.grids)
    }

    pub fn gold_tsv(&self) -> String {
        write_gold(&self.gold)
    }

    pub fn bundle_file_name(&self) -> String {
        format!("{}.bundle.json", self.bundle.source.doc_id)
    }

    /// Writes the bundle, manifests and gold file into `dir`; with `render`,
    /// also one PGM per page, referenced from the bundle. Returns the paths
    /// written, in order.
    pub fn write_to(&self, dir: &Path, render: bool) -> Result<Vec<PathBuf>, FixtureError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| FixtureError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        let raster_mode = if render {
            let mut names = Vec::new();
            for p in &self.bundle.source.pages {
                let name = format!("page-{}.pgm", p.page_index);
                let path = dir.join(&name);
                if let Some(r) = &p.raster {
                    fs::write(&path, r.to_pgm()).map_err(io(&path))?;
                    written.push(path);
                }
                names.push(name);
            }
            RasterEncoding::Paths(names)
        } else {
            RasterEncoding::Omit
        };
        let bundle_json = self.bundle.to_json(&raster_mode).expect("fixture bundle has a name for every page");
        for (name, content) in [
            (self.bundle_file_name(), bundle_json),
            ("annotations.manifest".to_string(), self.annotations_manifest()),
            ("tables.manifest".to_string(), self.tables_manifest()),
            ("gold.tsv".to_string(), self.gold_tsv()),
        ] {
            let path = dir.join(name);
            fs::write(&path, content).map_err(io(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}

const GROUPS: [&str; 6] = ["Core", "Plus", "Premier", "Select", "Basic", "Choice"];
const ROW_WORDS: [&str; 8] = ["Alder", "Birch", "Cedar", "Dogwood", "Elm", "Fir", "Gum", "Hazel"];
const COL_WORDS: [&str; 8] = ["North", "South", "East", "West", "Inner", "Outer", "Upper", "Lower"];

/// A random valid grid: one or two header rows and header columns, spans
/// only in the outermost header row and column, distinct header labels and a
/// mix of amounts and plain text in the data area.
pub fn random_grid(rng: &mut impl Rng, table_id: &str) -> TableGrid {
    let hr = rng.gen_range(1..=2);
    let hc = rng.gen_range(1..=2);
    let data_rows = rng.gen_range(1..=6);
    let data_cols = rng.gen_range(1..=5);
    let n_rows = hr + data_rows;
    let n_cols = hc + data_cols;
    let mut cells = vec![Cell::new(0, 0, hr, hc, "Item")];

    // Column headers: the top row may group columns when there are two header rows.
    let mut c = 0;
    let mut group = 0;
    while c < data_cols {
        let span = if hr == 2 { rng.gen_range(1..=(data_cols - c).min(3)) } else { 1 };
        if hr == 2 {
            cells.push(Cell::new(0, hc + c, 1, span, format!("{} group", GROUPS[group % GROUPS.len()])));
            group += 1;
        }
        for k in 0..span {
            let label = format!("{} {}", COL_WORDS[(c + k) % COL_WORDS.len()], c + k + 1);
            cells.push(Cell::single(hr - 1, hc + c + k, label));
        }
        c += span;
    }
    // Row headers, mirrored.
    let mut r = 0;
    let mut group = 0;
    while r < data_rows {
        let span = if hc == 2 { rng.gen_range(1..=(data_rows - r).min(3)) } else { 1 };
        if hc == 2 {
            cells.push(Cell::new(hr + r, 0, span, 1, format!("Tier {}", group + 1)));
            group += 1;
        }
        for k in 0..span {
            let label = format!("{} {}", ROW_WORDS[(r + k) % ROW_WORDS.len()], r + k + 1);
            cells.push(Cell::single(hr + r + k, hc - 1, label));
        }
        r += span;
    }
    for r in 0..data_rows {
        for c in 0..data_cols {
            let text = if rng.gen_bool(0.85) {
                MoneyValue::usd(rng.gen_range(0..500_000)).render()
            } else {
                ["Not covered", "Included", "n/a"].choose(rng).expect("options").to_string()
            };
            cells.push(Cell::single(hr + r, hc + c, text));
        }
    }
    TableGrid {
        table_id: table_id.to_string(),
        caption: if rng.gen_bool(0.8) { "plan cost".to_string() } else { String::new() },
        n_rows,
        n_cols,
        header_row_count: hr,
        header_col_count: hc,
        cells,
        source: SourceRef::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proration() {
        assert_eq!(prorate(1200, 1), 1200);
        assert_eq!(prorate(1200, 12), 100);
        assert_eq!(prorate(1000, 8), 417);
    }

    #[test]
    fn default_shape() {
        let f = generate_fixtures(&FixtureSpec::default()).unwrap();
        assert_eq!(f.grids.len(), 3);
        assert!(f.grids.iter().all(|g| g.data_cell_count() == 60 && g.validate().is_valid()));
        assert!(f.gold.len() >= 50);
        assert_eq!(f.bundle.source.pages.len(), 3);
    }

    #[test]
    fn minimal_spec() {
        let f = generate_fixtures(&FixtureSpec { categories: 1, tiers: 1, ..Default::default() }).unwrap();
        assert_eq!(f.grids.len(), 1);
        assert_eq!(f.grids[0].n_cols, 2);
        assert!(!f.gold.is_empty());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(generate_fixtures(&FixtureSpec { tiers: 6, ..Default::default() }).is_err());
        assert!(generate_fixtures(&FixtureSpec { months: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn random_grids_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..200 {
            let g = random_grid(&mut rng, &format!("g{i}"));
            assert!(g.validate().is_valid(), "{}", g.validate());
        }
    }
}
