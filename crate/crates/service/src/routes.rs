use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Query as UrlQuery, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use talentmine_core::build::BuildError;
use talentmine_core::index::IndexError;
use talentmine_core::ingest::{DocumentBundle, IngestError, RenderParams};
use talentmine_core::qa::{answer_pipeline, AnswerStatus, QaError, Query};
use talentmine_core::tablemodel::{parse_manifest_blocks, CellRef};

use crate::{AppState, ServiceError};

/// Request bodies above this size are refused with 413.
pub const MAX_BODY_BYTES: usize = 64 * 1024 * 1024;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/kb/stats", get(stats))
        .route("/documents", post(documents))
        .route("/query", post(query))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state)
}

struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> ApiError {
        ApiError { status, body: json!({ "error": message.into() }) }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> ApiError {
        let status = match &e {
            ServiceError::BadRequest(_)
            | ServiceError::Ingest(_)
            | ServiceError::Build(BuildError::Ingest { .. } | BuildError::DuplicateDocument(_))
            | ServiceError::Qa(QaError::Index(IndexError::EmptyQuery | IndexError::ZeroK)) => StatusCode::BAD_REQUEST,
            ServiceError::Build(BuildError::Linearize { .. }) | ServiceError::Qa(QaError::Provider(_)) => StatusCode::BAD_GATEWAY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut err = ApiError::new(status, e.to_string());
        if let ServiceError::Ingest(IngestError::Manifest(m)) = &e {
            err.body["details"] = json!({ "line": m.line, "column": m.column, "message": m.message });
        }
        err
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<crate::KbStats> {
    Json(state.stats())
}

#[derive(Deserialize)]
struct DocumentParams {
    doc_id: Option<String>,
}

fn is_json(headers: &HeaderMap) -> bool {
    headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.split(';').next())
        .is_some_and(|v| v.trim().eq_ignore_ascii_case("application/json"))
}

/// Bundles posted over HTTP must carry their rasters inline.
fn parse_bundle(body: &str) -> Result<DocumentBundle, ServiceError> {
    let value: serde_json::Value = serde_json::from_str(body).map_err(|e| ServiceError::BadRequest(format!("bundle JSON: {e}")))?;
    let has_path = value["pages"].as_array().is_some_and(|pages| pages.iter().any(|p| p["raster"].get("path").is_some()));
    if has_path {
        return Err(ServiceError::BadRequest("raster paths are not accepted over HTTP; send pgm_base64".into()));
    }
    Ok(DocumentBundle::from_json(body, None)?)
}

fn parse_manifest(body: &str, doc_id: &str) -> Result<DocumentBundle, ServiceError> {
    let blocks = parse_manifest_blocks(body).map_err(IngestError::Manifest)?;
    if blocks.is_empty() {
        return Err(ServiceError::BadRequest("manifest contains no tables".into()));
    }
    let grids: Vec<_> = blocks.into_iter().map(|b| b.grid).collect();
    Ok(DocumentBundle::from_tables(doc_id, &grids, &RenderParams::default()))
}

async fn documents(
    State(state): State<Arc<AppState>>,
    UrlQuery(params): UrlQuery<DocumentParams>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<(StatusCode, Json<crate::IngestSummary>), ApiError> {
    let Some(permit) = state.try_begin_ingest() else {
        return Err(ApiError::new(StatusCode::CONFLICT, "a knowledge-base build is already in progress"));
    };
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "body is not UTF-8"))?;
    let doc_id = params.doc_id.unwrap_or_else(|| "manifest".into());
    if doc_id.trim().is_empty() || doc_id.contains(char::is_whitespace) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "doc_id must be a single word"));
    }
    let bundle = if is_json(&headers) { parse_bundle(text)? } else { parse_manifest(text, &doc_id)? };
    let worker = state.clone();
    let summary = tokio::task::spawn_blocking(move || worker.ingest(&permit, bundle))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok((StatusCode::ACCEPTED, Json(summary)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub chunk_id: String,
    pub text: String,
    pub provenance: Option<CellRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub text: String,
    pub value_cents: Option<i64>,
    pub citations: Vec<Citation>,
    pub status: AnswerStatus,
}

async fn query(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<QueryResponse>, ApiError> {
    let req: QueryRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("query JSON: {e}")))?;
    if req.question.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "question must not be empty"));
    }
    if req.k == Some(0) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "k must be at least 1"));
    }
    let Some(snap) = state.snapshot() else {
        return Err(ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no knowledge base loaded; POST /documents first"));
    };
    let worker = state.clone();
    let answer = tokio::task::spawn_blocking(move || {
        let settings = worker.qa_settings(req.k);
        answer_pipeline(&Query::new(req.question), &snap.kb, worker.embedder(), worker.answerer(), &settings).map(|a| (a, snap))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(ServiceError::from)?;
    let (answer, snap) = answer;
    let citations = answer
        .citations
        .iter()
        .map(|id| {
            let chunk = snap.kb.chunk(id);
            Citation {
                chunk_id: id.clone(),
                text: chunk.map(|c| c.text.clone()).unwrap_or_default(),
                provenance: chunk.and_then(|c| c.provenance.clone()),
            }
        })
        .collect();
    Ok(Json(QueryResponse { text: answer.text, value_cents: answer.value.map(|v| v.amount_cents), citations, status: answer.status }))
}
