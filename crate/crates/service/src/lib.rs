//! HTTP service over the TalentMine pipeline.
//!
//! | Method | Path         | Body                                  | Success |
//! |--------|--------------|---------------------------------------|---------|
//! | POST   | `/documents` | table manifest (text) or bundle (JSON) | 202     |
//! | POST   | `/query`     | `{"question": "...", "k": 5}`         | 200     |
//! | GET    | `/health`    |                                       | 200     |
//! | GET    | `/kb/stats`  |                                       | 200     |
//!
//! Errors are JSON objects with an `error` field.

mod config;
mod provider;
mod routes;
mod state;

use std::sync::Arc;

use talentmine_core::build::BuildError;
use talentmine_core::index::IndexError;
use talentmine_core::ingest::IngestError;
use talentmine_core::qa::QaError;
use thiserror::Error;

pub use config::{env_name, AnswererChoice, ProviderSettings, ServiceConfig, DEFAULT_PORT, ENV_PREFIX, KEYS};
pub use provider::HttpCompletionProvider;
pub use routes::{router, Citation, QueryRequest, QueryResponse, MAX_BODY_BYTES};
pub use state::{AppState, IngestPermit, IngestSummary, KbSnapshot, KbStats};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Qa(#[from] QaError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Binds the configured address and serves until Ctrl-C.
pub async fn serve(state: Arc<AppState>) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(state.config().bind_addr()).await?;
    serve_on(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

/// Serves on an already bound listener until `shutdown` completes.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await?;
    Ok(())
}
