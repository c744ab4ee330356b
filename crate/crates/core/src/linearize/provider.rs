use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::tablemodel::{tables_from_manifest, TableGrid};

use super::file::render_sentences;
use super::parse::parse_linearization;
use super::prompt::{build_prompt, PromptPayload, PromptTemplate};
use super::reference::reference_linearize;
use super::{LinearizeError, LinearizedTable, SentenceStyle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderErrorKind {
    /// Could not reach the provider.
    Transport,
    /// Provider answered with an error status.
    Rejected,
    /// Reply could not be interpreted.
    Malformed,
}

impl fmt::Display for ProviderErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProviderErrorKind::Transport => "transport",
            ProviderErrorKind::Rejected => "rejected",
            ProviderErrorKind::Malformed => "malformed reply",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("provider {provider}: {kind}: {message}")]
pub struct ProviderError {
    pub provider: String,
    pub kind: ProviderErrorKind,
    pub message: String,
}

impl ProviderError {
    pub fn new(provider: impl Into<String>, kind: ProviderErrorKind, message: impl Into<String>) -> ProviderError {
        ProviderError { provider: provider.into(), kind, message: message.into() }
    }
}

/// A text completion backend.
///
/// `generate` either returns text or a [`ProviderError`]; it never panics on
/// bad input. Implementations state through [`allows_concurrent_calls`]
/// whether callers may overlap requests.
///
/// [`allows_concurrent_calls`]: CompletionProvider::allows_concurrent_calls
pub trait CompletionProvider: Send + Sync {
    fn name(&self) -> &str;

    /// Longest reply, in characters, the provider will produce.
    fn max_output_chars(&self) -> usize {
        64 * 1024
    }

    fn allows_concurrent_calls(&self) -> bool {
        true
    }

    fn generate(&self, prompt: &str) -> Result<String, ProviderError>;
}

/// Offline stand-in for a table-to-text model.
///
/// Recovers the table from the prompt (manifest text, or a registered image
/// reference) and answers with the reference linearization, one sentence per
/// line. Stateless, so concurrent calls are fine.
#[derive(Debug, Clone, Default)]
pub struct ReferenceProvider {
    images: BTreeMap<String, TableGrid>,
}

impl ReferenceProvider {
    pub fn new() -> ReferenceProvider {
        ReferenceProvider::default()
    }

    /// Makes `[image:<reference>]` payloads resolve to `grid`.
    pub fn with_image(mut self, reference: impl Into<String>, grid: TableGrid) -> ReferenceProvider {
        self.images.insert(reference.into(), grid);
        self
    }

    fn grids_in(&self, prompt: &str) -> Result<Vec<TableGrid>, ProviderError> {
        let mut grids = Vec::new();
        for (reference, grid) in &self.images {
            if prompt.contains(&format!("[image:{reference}]")) {
                grids.push(grid.clone());
            }
        }
        let manifest = manifest_lines(prompt);
        if !manifest.is_empty() {
            let parsed = tables_from_manifest(&manifest)
                .map_err(|e| ProviderError::new(self.name(), ProviderErrorKind::Malformed, e.to_string()))?;
            grids.extend(parsed);
        }
        if grids.is_empty() {
            return Err(ProviderError::new(self.name(), ProviderErrorKind::Rejected, "prompt contains no table"));
        }
        Ok(grids)
    }
}

/// Longest run of consecutive manifest-shaped lines.
fn manifest_lines(prompt: &str) -> String {
    const KEYS: [&str; 6] = ["table_id:", "caption:", "n_rows:", "n_cols:", "header_rows:", "header_cols:"];
    let is_manifest = |l: &str| l.starts_with("cell ") || l.trim() == "---" || KEYS.iter().any(|k| l.starts_with(k));
    let mut best: Vec<&str> = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    for line in prompt.lines() {
        if is_manifest(line) {
            cur.push(line);
        } else {
            if cur.len() > best.len() {
                best = std::mem::take(&mut cur);
            }
            cur.clear();
        }
    }
    if cur.len() > best.len() {
        best = cur;
    }
    let mut out = best.join("\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}

impl CompletionProvider for ReferenceProvider {
    fn name(&self) -> &str {
        "reference"
    }

    fn generate(&self, prompt: &str) -> Result<String, ProviderError> {
        let mut out = String::new();
        for grid in self.grids_in(prompt)? {
            let lin = reference_linearize(&grid, SentenceStyle::default())
                .map_err(|e| ProviderError::new(self.name(), ProviderErrorKind::Malformed, e.to_string()))?;
            out.push_str(&render_sentences(&lin));
        }
        Ok(out)
    }
}

/// Prompts `provider` with the table and parses its reply onto `grid`.
pub fn llm_linearize(
    grid: &TableGrid,
    payload: PromptPayload<'_>,
    provider: &dyn CompletionProvider,
    template: &PromptTemplate,
) -> Result<LinearizedTable, LinearizeError> {
    let prompt = build_prompt(payload, template)?;
    let raw = provider.generate(&prompt)?;
    parse_linearization(&raw, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tablemodel::grid_from_manifest;

    const MANIFEST: &str = "table_id: oop\ncaption: out-of-pocket maximum\nn_rows: 3\nn_cols: 3\ncell 0 0 1 1 Month\ncell 0 1 1 1 You only\ncell 0 2 1 1 You + spouse\ncell 1 0 1 1 January\ncell 1 1 1 1 $1,168.00\ncell 1 2 1 1 $4,000.00\ncell 2 0 1 1 February\ncell 2 1 1 1 $1,070.00\ncell 2 2 1 1 $3,667.00\n";

    struct Canned(Result<String, ProviderError>);

    impl CompletionProvider for Canned {
        fn name(&self) -> &str {
            "canned"
        }
        fn generate(&self, _prompt: &str) -> Result<String, ProviderError> {
            self.0.clone()
        }
    }

    #[test]
    fn mock_matches_reference() {
        let g = grid_from_manifest(MANIFEST).unwrap();
        let t = PromptTemplate::default_table_to_text();
        let via_provider = llm_linearize(&g, PromptPayload::Grid(&g), &ReferenceProvider::new(), &t).unwrap();
        assert_eq!(via_provider, reference_linearize(&g, SentenceStyle::default()).unwrap());
    }

    #[test]
    fn mock_resolves_registered_images() {
        let g = grid_from_manifest(MANIFEST).unwrap();
        let t = PromptTemplate::default_table_to_text();
        let p = ReferenceProvider::new().with_image("page-2.pgm#r0", g.clone());
        let lin = llm_linearize(&g, PromptPayload::Image("page-2.pgm#r0"), &p, &t).unwrap();
        assert_eq!(lin.sentences.len(), 4);
        let unknown = llm_linearize(&g, PromptPayload::Image("nope"), &p, &t).unwrap_err();
        assert!(matches!(unknown, LinearizeError::Provider(ProviderError { kind: ProviderErrorKind::Rejected, .. })));
    }

    #[test]
    fn empty_reply_is_a_coverage_error() {
        let g = grid_from_manifest(MANIFEST).unwrap();
        let t = PromptTemplate::default_table_to_text();
        match llm_linearize(&g, PromptPayload::Grid(&g), &Canned(Ok(String::new())), &t).unwrap_err() {
            LinearizeError::Coverage { missing, .. } => assert_eq!(missing, vec![(1, 1), (1, 2), (2, 1), (2, 2)]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn provider_errors_carry_the_name() {
        let g = grid_from_manifest(MANIFEST).unwrap();
        let t = PromptTemplate::default_table_to_text();
        let failing = Canned(Err(ProviderError::new("canned", ProviderErrorKind::Transport, "connection refused")));
        let err = llm_linearize(&g, PromptPayload::Grid(&g), &failing, &t).unwrap_err();
        assert!(err.to_string().contains("provider canned"), "{err}");
    }
}
