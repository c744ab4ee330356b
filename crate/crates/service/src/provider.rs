//! Completion provider over HTTP.
//!
//! Request: `POST <endpoint>` with `{"prompt": "...", "max_output_chars": n}`
//! and, when configured, `"model"` and an `Authorization: Bearer` header.
//! Reply: a JSON object whose `completion` field holds the generated text.

use std::sync::OnceLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use talentmine_core::linearize::{CompletionProvider, ProviderError, ProviderErrorKind};

use crate::config::ProviderSettings;

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a str>,
    max_output_chars: usize,
}

#[derive(Deserialize)]
struct CompletionReply {
    completion: String,
}

pub struct HttpCompletionProvider {
    settings: ProviderSettings,
    client: OnceLock<Result<reqwest::blocking::Client, String>>,
}

impl HttpCompletionProvider {
    pub fn new(settings: ProviderSettings) -> HttpCompletionProvider {
        HttpCompletionProvider { settings, client: OnceLock::new() }
    }

    pub fn endpoint(&self) -> &str {
        &self.settings.endpoint
    }

    fn error(&self, kind: ProviderErrorKind, message: impl Into<String>) -> ProviderError {
        ProviderError::new(self.name(), kind, message)
    }

    // The blocking client owns a runtime of its own, so it is built on first
    // use from a blocking thread rather than inside the server's runtime.
    fn client(&self) -> Result<&reqwest::blocking::Client, ProviderError> {
        self.client
            .get_or_init(|| {
                reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(self.settings.timeout_secs.max(1)))
                    .build()
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| self.error(ProviderErrorKind::Transport, e.clone()))
    }
}

impl CompletionProvider for HttpCompletionProvider {
    fn name(&self) -> &str {
        "http"
    }

    fn generate(&self, prompt: &str) -> Result<String, ProviderError> {
        let body = CompletionRequest { prompt, model: self.settings.model.as_deref(), max_output_chars: self.max_output_chars() };
        let mut request = self.client()?.post(&self.settings.endpoint).json(&body);
        if let Some(key) = &self.settings.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| self.error(ProviderErrorKind::Transport, e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(self.error(ProviderErrorKind::Rejected, format!("HTTP {status}: {}", text.chars().take(200).collect::<String>())));
        }
        let reply: CompletionReply = response.json().map_err(|e| self.error(ProviderErrorKind::Malformed, e.to_string()))?;
        Ok(reply.completion)
    }
}
