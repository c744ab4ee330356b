use crate::linearize::{sentence_spans, sentence_value};
use crate::tablemodel::find_money;

use super::pipeline::Answerer;
use super::{facet_mentions, Answer, AnswerStatus, AssembledContext, QaError, Query, NOT_FOUND_PHRASE};

/// Scans the context in rank order for the first table sentence that names
/// exactly the queried month, tier and benefit (each set facet, and no other
/// value of that dimension), and answers with the amount it states.
///
/// Prose blocks are never used. A query without facets is not found.
pub fn extractive_answer(q: &Query, ctx: &AssembledContext, not_found_phrase: &str) -> Answer {
    let facets = q.effective_facets();
    if facets.is_empty() {
        return Answer::not_found(not_found_phrase);
    }
    for block in ctx.blocks.iter().filter(|b| b.kind.is_table() && !b.truncated) {
        for sentence in sentence_spans(&block.text) {
            if !facet_mentions(sentence).matches_exactly(&facets) {
                continue;
            }
            let Some(value) = sentence_value(sentence).or_else(|| find_money(sentence)) else { continue };
            return Answer {
                text: sentence.to_string(),
                value: Some(value),
                citations: vec![block.chunk_id.clone()],
                status: AnswerStatus::Answered,
            };
        }
    }
    Answer::not_found(not_found_phrase)
}

#[derive(Debug, Clone)]
pub struct ExtractiveAnswerer {
    pub not_found_phrase: String,
}

impl Default for ExtractiveAnswerer {
    fn default() -> Self {
        ExtractiveAnswerer { not_found_phrase: NOT_FOUND_PHRASE.to_string() }
    }
}

impl Answerer for ExtractiveAnswerer {
    fn id(&self) -> String {
        "extractive".to_string()
    }

    fn answer(&self, q: &Query, ctx: &AssembledContext) -> Result<Answer, QaError> {
        Ok(extractive_answer(q, ctx, &self.not_found_phrase))
    }
}
