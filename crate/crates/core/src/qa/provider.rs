use std::sync::Arc;

use crate::index::KnowledgeBase;
use crate::linearize::{CompletionProvider, ProviderError, ProviderErrorKind};
use crate::tablemodel::find_money;

use super::pipeline::Answerer;
use super::{extractive_answer, Answer, AnswerStatus, AssembledContext, ContextBlock, QaError, Query, NOT_FOUND_PHRASE};

const DEFAULT_QA_PROMPT: &str = include_str!("../../prompts/qa.txt");

/// QA prompt with `{context}`, `{question}` and optionally `{not_found}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaTemplate {
    pub template_id: String,
    pub text: String,
}

impl QaTemplate {
    pub fn new(template_id: impl Into<String>, text: impl Into<String>) -> Result<QaTemplate, QaError> {
        let text = text.into();
        for key in ["{context}", "{question}"] {
            match text.matches(key).count() {
                1 => {}
                n => return Err(QaError::Template(format!("expected one {key} placeholder, found {n}"))),
            }
        }
        Ok(QaTemplate { template_id: template_id.into(), text })
    }

    pub fn default_qa() -> QaTemplate {
        QaTemplate::new("qa-v1", DEFAULT_QA_PROMPT).expect("bundled QA template is valid")
    }

    /// Passages are written one per line as `[chunk_id] text`.
    pub fn render(&self, question: &str, ctx: &AssembledContext, not_found_phrase: &str) -> String {
        let context: Vec<String> = ctx.blocks.iter().map(|b| format!("[{}] {}", b.chunk_id, one_line(&b.text))).collect();
        self.text
            .replace("{not_found}", not_found_phrase)
            .replace("{context}", &context.join("\n"))
            .replace("{question}", &one_line(question))
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Interprets a provider reply.
///
/// `[id]` markers naming context passages become citations and are removed
/// from the text; the first amount in the remaining text is the value. A
/// reply containing the not-found phrase, an empty reply, or a reply without
/// an amount to a benefit question is not found.
pub fn parse_provider_reply(reply: &str, q: &Query, ctx: &AssembledContext, not_found_phrase: &str) -> Answer {
    if reply.contains(not_found_phrase) {
        return Answer::not_found(not_found_phrase);
    }
    let mut citations: Vec<String> = Vec::new();
    let mut text = String::new();
    let mut rest = reply;
    while let Some(open) = rest.find('[') {
        let Some(close) = rest[open..].find(']').map(|c| open + c) else { break };
        let id = &rest[open + 1..close];
        if ctx.blocks.iter().any(|b| b.chunk_id == id) {
            text.push_str(&rest[..open]);
            if !citations.iter().any(|c| c == id) {
                citations.push(id.to_string());
            }
        } else {
            text.push_str(&rest[..=close]);
        }
        rest = &rest[close + 1..];
    }
    text.push_str(rest);
    let text = one_line(&text).replace(" .", ".");
    let value = find_money(&text);
    if text.is_empty() || (value.is_none() && q.effective_facets().benefit.is_some()) {
        return Answer::not_found(not_found_phrase);
    }
    Answer { text, value, citations, status: AnswerStatus::Answered }
}

pub fn provider_answer(
    q: &Query,
    ctx: &AssembledContext,
    provider: &dyn CompletionProvider,
    template: &QaTemplate,
    not_found_phrase: &str,
) -> Result<Answer, QaError> {
    let prompt = template.render(&q.text, ctx, not_found_phrase);
    let reply = provider.generate(&prompt)?;
    Ok(parse_provider_reply(&reply, q, ctx, not_found_phrase))
}

pub struct ProviderAnswerer {
    pub provider: Arc<dyn CompletionProvider>,
    pub template: QaTemplate,
    pub not_found_phrase: String,
    /// Concurrency limit; forced to 1 for providers that disallow overlap.
    pub max_in_flight: usize,
}

impl ProviderAnswerer {
    pub fn new(provider: Arc<dyn CompletionProvider>) -> ProviderAnswerer {
        ProviderAnswerer { provider, template: QaTemplate::default_qa(), not_found_phrase: NOT_FOUND_PHRASE.to_string(), max_in_flight: 4 }
    }
}

impl Answerer for ProviderAnswerer {
    fn id(&self) -> String {
        format!("provider:{}", self.provider.name())
    }

    fn answer(&self, q: &Query, ctx: &AssembledContext) -> Result<Answer, QaError> {
        provider_answer(q, ctx, self.provider.as_ref(), &self.template, &self.not_found_phrase)
    }

    fn max_in_flight(&self) -> usize {
        if self.provider.allows_concurrent_calls() {
            self.max_in_flight.max(1)
        } else {
            1
        }
    }
}

/// Offline QA model: reads the passages and question back out of a prompt
/// rendered from the default template, answers extractively and replies with
/// the answer sentence followed by its `[id]`, or with the not-found phrase.
#[derive(Debug, Clone)]
pub struct MockQaProvider {
    kb: Arc<KnowledgeBase>,
    not_found_phrase: String,
}

impl MockQaProvider {
    pub fn new(kb: Arc<KnowledgeBase>) -> MockQaProvider {
        MockQaProvider { kb, not_found_phrase: NOT_FOUND_PHRASE.to_string() }
    }

    pub fn with_not_found_phrase(mut self, phrase: impl Into<String>) -> MockQaProvider {
        self.not_found_phrase = phrase.into();
        self
    }
}

impl CompletionProvider for MockQaProvider {
    fn name(&self) -> &str {
        "mock-qa"
    }

    fn generate(&self, prompt: &str) -> Result<String, ProviderError> {
        let malformed = |m: &str| ProviderError::new("mock-qa", ProviderErrorKind::Malformed, m);
        let question = prompt
            .lines()
            .find_map(|l| l.strip_prefix("Question: "))
            .ok_or_else(|| malformed("prompt has no question line"))?;
        let mut blocks = Vec::new();
        for line in prompt.lines() {
            let Some(rest) = line.strip_prefix('[') else { continue };
            let Some((id, text)) = rest.split_once("] ") else { continue };
            let Some(chunk) = self.kb.chunk(id) else { continue };
            blocks.push(ContextBlock { chunk_id: id.to_string(), text: text.to_string(), kind: chunk.kind, score: 0.0, truncated: chunk.text != text });
        }
        let ctx = AssembledContext { query_text: question.to_string(), blocks };
        let answer = extractive_answer(&Query::new(question), &ctx, &self.not_found_phrase);
        Ok(match answer.status {
            AnswerStatus::NotFound => self.not_found_phrase.clone(),
            AnswerStatus::Answered => format!("{} [{}]", answer.text, answer.citations.join("] [")),
        })
    }
}
