use crate::tablemodel::{grid_to_manifest, TableGrid};

use super::LinearizeError;

const PLACEHOLDERS: [&str; 2] = ["{image}", "{table}"];

/// Table-to-text instruction shipped with the crate.
pub const DEFAULT_TABLE_PROMPT: &str = include_str!("../../prompts/table_to_text.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    template_id: String,
    text: String,
}

impl PromptTemplate {
    /// Checks that `text` holds exactly one `{image}` or `{table}` placeholder.
    pub fn new(template_id: impl Into<String>, text: impl Into<String>) -> Result<PromptTemplate, LinearizeError> {
        let template_id = template_id.into();
        let text = text.into();
        let count: usize = PLACEHOLDERS.iter().map(|p| text.matches(p).count()).sum();
        match count {
            0 => Err(LinearizeError::MissingPlaceholder { template_id }),
            1 => Ok(PromptTemplate { template_id, text }),
            count => Err(LinearizeError::MultiplePlaceholders { template_id, count }),
        }
    }

    pub fn default_table_to_text() -> PromptTemplate {
        PromptTemplate::new("table-to-text-v1", DEFAULT_TABLE_PROMPT).expect("bundled template has one placeholder")
    }

    pub fn template_id(&self) -> &str {
        &self.template_id
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// What gets substituted into the template.
#[derive(Debug, Clone, Copy)]
pub enum PromptPayload<'a> {
    /// Serialized as manifest text on its own lines.
    Grid(&'a TableGrid),
    /// Opaque reference to an image the provider can resolve.
    Image(&'a str),
}

impl PromptPayload<'_> {
    fn render(&self) -> String {
        match self {
            PromptPayload::Grid(g) => format!("\n{}", grid_to_manifest(g)),
            PromptPayload::Image(r) => format!("[image:{r}]"),
        }
    }
}

pub fn build_prompt(payload: PromptPayload<'_>, template: &PromptTemplate) -> Result<String, LinearizeError> {
    let placeholder = PLACEHOLDERS
        .iter()
        .find(|p| template.text.contains(**p))
        .ok_or_else(|| LinearizeError::MissingPlaceholder { template_id: template.template_id.clone() })?;
    Ok(template.text.replacen(placeholder, &payload.render(), 1))
}
