use std::fmt;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use talentmine_core::build::LinearizerKind;
use talentmine_core::index::DEFAULT_DIM;
use talentmine_core::qa::{DEFAULT_CONTEXT_CAP, DEFAULT_K, NOT_FOUND_PHRASE};

use crate::ServiceError;

pub const ENV_PREFIX: &str = "TALENTMINE_";
pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnswererChoice {
    Extractive,
    Provider,
}

impl FromStr for AnswererChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "extractive" => Ok(AnswererChoice::Extractive),
            "provider" => Ok(AnswererChoice::Provider),
            other => Err(format!("unknown answerer {other:?} (expected extractive or provider)")),
        }
    }
}

impl fmt::Display for AnswererChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnswererChoice::Extractive => "extractive",
            AnswererChoice::Provider => "provider",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderSettings {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: Option<String>,
    pub timeout_secs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub listen: IpAddr,
    pub port: u16,
    /// Loaded at startup when present; rewritten after every ingest.
    pub kb_path: Option<PathBuf>,
    pub kb_id: String,
    pub embedder_dim: usize,
    pub k: usize,
    pub context_cap: usize,
    pub answerer: AnswererChoice,
    pub linearizer: LinearizerKind,
    pub provider: Option<ProviderSettings>,
    pub not_found_phrase: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: DEFAULT_PORT,
            kb_path: None,
            kb_id: "talentmine".into(),
            embedder_dim: DEFAULT_DIM,
            k: DEFAULT_K,
            context_cap: DEFAULT_CONTEXT_CAP,
            answerer: AnswererChoice::Extractive,
            linearizer: LinearizerKind::Reference,
            provider: None,
            not_found_phrase: NOT_FOUND_PHRASE.into(),
        }
    }
}

/// Recognised keys, as written in the config file.
pub const KEYS: &[&str] = &[
    "listen",
    "port",
    "kb_path",
    "kb_id",
    "embedder.dim",
    "qa.k",
    "qa.context_cap",
    "qa.answerer",
    "qa.not_found_phrase",
    "ingest.linearizer",
    "provider.endpoint",
    "provider.api_key",
    "provider.model",
    "provider.timeout_secs",
];

/// `qa.not_found_phrase` → `TALENTMINE_QA_NOT_FOUND_PHRASE`.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "_").to_uppercase())
}

#[derive(Default)]
struct Raw {
    endpoint: Option<String>,
    api_key: Option<String>,
    model: Option<String>,
    timeout_secs: Option<u64>,
}

impl ServiceConfig {
    pub fn bind_addr(&self) -> SocketAddr {
        SocketAddr::new(self.listen, self.port)
    }

    /// Reads `path` (if given) and then the process environment.
    pub fn load(path: Option<&Path>) -> Result<ServiceConfig, ServiceError> {
        let text = match path {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| ServiceError::Config(format!("{}: {e}", p.display())))?),
            None => None,
        };
        ServiceConfig::from_sources(text.as_deref(), std::env::vars())
    }

    /// Builds a configuration from `key = value` lines and then environment
    /// variables, which win. Blank lines and `#` comments are ignored.
    pub fn from_sources(
        file: Option<&str>,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<ServiceConfig, ServiceError> {
        let mut entries: Vec<(String, String, String)> = Vec::new();
        for (i, line) in file.unwrap_or_default().lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ServiceError::Config(format!("config line {}: expected key = value", i + 1)))?;
            entries.push((k.trim().to_string(), v.trim().to_string(), format!("config line {}", i + 1)));
        }
        let mut env: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        env.sort();
        for (name, value) in env {
            let key = KEYS
                .iter()
                .find(|k| env_name(k) == name)
                .ok_or_else(|| ServiceError::Config(format!("unknown environment setting {name}")))?;
            entries.push((key.to_string(), value, name));
        }

        let mut c = ServiceConfig::default();
        let mut raw = Raw::default();
        for (key, value, origin) in entries {
            let bad = |m: String| ServiceError::Config(format!("{origin}: {key}: {m}"));
            let opt = |v: &str| if v.is_empty() { None } else { Some(v.to_string()) };
            match key.as_str() {
                "listen" => c.listen = value.parse().map_err(|e| bad(format!("{e}")))?,
                "port" => c.port = value.parse().map_err(|e| bad(format!("{e}")))?,
                "kb_path" => c.kb_path = opt(&value).map(PathBuf::from),
                "kb_id" => c.kb_id = value,
                "embedder.dim" => c.embedder_dim = value.parse().map_err(|e| bad(format!("{e}")))?,
                "qa.k" => c.k = value.parse().map_err(|e| bad(format!("{e}")))?,
                "qa.context_cap" => c.context_cap = value.parse().map_err(|e| bad(format!("{e}")))?,
                "qa.answerer" => c.answerer = value.parse().map_err(bad)?,
                "qa.not_found_phrase" => c.not_found_phrase = value,
                "ingest.linearizer" => c.linearizer = value.parse().map_err(bad)?,
                "provider.endpoint" => raw.endpoint = opt(&value),
                "provider.api_key" => raw.api_key = opt(&value),
                "provider.model" => raw.model = opt(&value),
                "provider.timeout_secs" => raw.timeout_secs = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
                _ => return Err(bad("unknown setting".into())),
            }
        }
        if let Some(endpoint) = raw.endpoint {
            c.provider = Some(ProviderSettings { endpoint, api_key: raw.api_key, model: raw.model, timeout_secs: raw.timeout_secs.unwrap_or(60) });
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        let bad = |m: &str| Err(ServiceError::Config(m.to_string()));
        if self.k == 0 {
            return bad("qa.k must be at least 1");
        }
        if self.embedder_dim == 0 {
            return bad("embedder.dim must be at least 1");
        }
        if self.not_found_phrase.trim().is_empty() {
            return bad("qa.not_found_phrase must not be empty");
        }
        if self.kb_id.is_empty() || self.kb_id.contains(char::is_whitespace) {
            return bad("kb_id must be a single word");
        }
        if self.provider.is_none() {
            if self.answerer == AnswererChoice::Provider {
                return bad("qa.answerer = provider needs provider.endpoint");
            }
            if self.linearizer == LinearizerKind::Provider {
                return bad("ingest.linearizer = provider needs provider.endpoint");
            }
        }
        Ok(())
    }
}
