use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use talentmine_core::fixtures::{generate_fixtures, FixtureSpec};
use talentmine_core::ingest::RasterEncoding;
use talentmine_core::qa::NOT_FOUND_PHRASE;
use talentmine_service::{router, AppState, QueryResponse, ServiceConfig};
use tower::ServiceExt;

fn benchmark_manifest() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/benchmark.manifest");
    std::fs::read_to_string(path).unwrap()
}

fn state(config: ServiceConfig) -> Arc<AppState> {
    Arc::new(AppState::new(config).unwrap())
}

async fn send(state: &Arc<AppState>, req: Request<Body>) -> (StatusCode, Value) {
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn get(path: &str) -> Request<Body> {
    Request::get(path).body(Body::empty()).unwrap()
}

fn post_text(path: &str, body: String) -> Request<Body> {
    Request::post(path).header(header::CONTENT_TYPE, "text/plain").body(Body::from(body)).unwrap()
}

fn post_json(path: &str, body: String) -> Request<Body> {
    Request::post(path).header(header::CONTENT_TYPE, "application/json").body(Body::from(body)).unwrap()
}

fn ask(question: &str) -> Request<Body> {
    post_json("/query", json!({ "question": question }).to_string())
}

const Q1: &str = "What is the network deductible for yourself in January?";

#[tokio::test]
async fn fresh_service_is_healthy_and_empty() {
    let s = state(ServiceConfig::default());
    assert_eq!(send(&s, get("/health")).await, (StatusCode::OK, json!({ "status": "ok" })));
    let (status, stats) = send(&s, get("/kb/stats")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(stats["chunk_count"], 0);
    assert_eq!(stats["loaded"], false);
    let (status, body) = send(&s, ask(Q1)).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert!(body["error"].is_string());
}

#[tokio::test]
async fn fixture_bundle_ingest_reports_chunk_counts() {
    let s = state(ServiceConfig::default());
    let f = generate_fixtures(&FixtureSpec::default()).unwrap();
    let body = f.bundle.to_json(&RasterEncoding::Inline).unwrap();
    let (status, summary) = send(&s, post_json("/documents", body)).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{summary}");
    let cells: usize = f.grids.iter().map(|g| g.data_cell_count()).sum();
    assert_eq!(summary["data_cell_count"], cells);
    assert_eq!(summary["chunks_added"].as_u64().unwrap() as usize, cells + summary["prose_chunks"].as_u64().unwrap() as usize);
    assert!(summary["prose_chunks"].as_u64().unwrap() > 0);
    let (_, stats) = send(&s, get("/kb/stats")).await;
    assert_eq!(stats["chunk_count"], summary["chunk_count"]);
    assert_eq!(stats["doc_count"], 1);
    assert_eq!(stats["table_chunk_count"], cells);

    let g = &f.gold[0];
    let (status, answer) = send(&s, ask(&g.question)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(answer["value_cents"], g.expected.amount_cents);
}

#[tokio::test]
async fn first_benchmark_question_over_http() {
    let s = state(ServiceConfig::default());
    let (status, _) = send(&s, post_text("/documents?doc_id=benefits", benchmark_manifest())).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let (status, body) = send(&s, ask(Q1)).await;
    assert_eq!(status, StatusCode::OK);
    let answer: QueryResponse = serde_json::from_value(body.clone()).unwrap();
    assert_eq!(body["status"], "answered");
    assert_eq!(answer.value_cents, Some(25000));
    assert_eq!(answer.citations.len(), 1);
    let c = &answer.citations[0];
    assert_eq!(c.text, "For January, the network deductible for You only is $250.00.");
    assert_eq!(c.provenance.as_ref().map(|p| (p.table_id.as_str(), p.row, p.col)), Some(("network-deductible", 1, 1)));

    let (status, body) = send(&s, ask("hello")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "not_found");
    assert_eq!(body["text"], NOT_FOUND_PHRASE);
    assert_eq!(body["value_cents"], Value::Null);
    assert_eq!(body["citations"], json!([]));
}

#[tokio::test]
async fn query_validation() {
    let s = state(ServiceConfig::default());
    send(&s, post_text("/documents", benchmark_manifest())).await;
    for bad in [json!({ "question": "" }), json!({ "question": "   " }), json!({ "question": Q1, "k": 0 }), json!({ "q": Q1 })] {
        let (status, body) = send(&s, post_json("/query", bad.to_string())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    }
    let (status, _) = send(&s, post_json("/query", "not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, body) = send(&s, post_json("/query", json!({ "question": "???" }).to_string())).await;
    assert_eq!((status, &body["status"]), (StatusCode::OK, &json!("not_found")));
    let (status, body) = send(&s, post_json("/query", json!({ "question": Q1, "k": 1 }).to_string())).await;
    assert_eq!((status, &body["value_cents"]), (StatusCode::OK, &json!(25000)));
}

#[tokio::test]
async fn malformed_documents_are_rejected() {
    let s = state(ServiceConfig::default());
    let (status, body) = send(&s, post_text("/documents", "table_id: t\nn_rows: two\n".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["details"]["line"], 2);
    let (status, _) = send(&s, post_text("/documents", String::new())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = send(&s, post_json("/documents", "{\"doc_id\": 3}".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let with_path = json!({ "doc_id": "d", "pages": [{ "page_index": 0, "prose": [], "raster": { "path": "/etc/passwd" } }] });
    let (status, body) = send(&s, post_json("/documents", with_path.to_string())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("raster paths"));
    let (_, stats) = send(&s, get("/kb/stats")).await;
    assert_eq!(stats["loaded"], false);
}

#[tokio::test]
async fn second_ingest_during_a_build_conflicts() {
    let s = state(ServiceConfig::default());
    let permit = s.try_begin_ingest().unwrap();
    let (status, _) = send(&s, post_text("/documents", benchmark_manifest())).await;
    assert_eq!(status, StatusCode::CONFLICT);
    drop(permit);
    let (status, _) = send(&s, post_text("/documents", benchmark_manifest())).await;
    assert_eq!(status, StatusCode::ACCEPTED);
}

#[tokio::test]
async fn reingesting_a_document_replaces_its_chunks() {
    let s = state(ServiceConfig::default());
    let (_, first) = send(&s, post_text("/documents?doc_id=a", benchmark_manifest())).await;
    let (_, again) = send(&s, post_text("/documents?doc_id=a", benchmark_manifest())).await;
    assert_eq!(again["chunks_replaced"], first["chunks_added"]);
    assert_eq!(again["chunk_count"], first["chunk_count"]);
    let (_, other) = send(&s, post_text("/documents?doc_id=b", benchmark_manifest())).await;
    assert_eq!(other["doc_count"], 2);
    assert_eq!(other["chunk_count"].as_u64().unwrap(), 2 * first["chunk_count"].as_u64().unwrap());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn queries_during_a_swap_see_one_snapshot_or_the_other() {
    let s = state(ServiceConfig::default());
    send(&s, post_text("/documents?doc_id=plan", benchmark_manifest())).await;
    let updated = benchmark_manifest().replacen("cell 1 1 1 1 $250.00", "cell 1 1 1 1 $999.00", 1);
    assert_ne!(updated, benchmark_manifest());

    let mut tasks = Vec::new();
    for i in 0..40 {
        let s = s.clone();
        let updated = updated.clone();
        tasks.push(tokio::spawn(async move {
            if i == 10 {
                let (status, _) = send(&s, post_text("/documents?doc_id=plan", updated)).await;
                assert_eq!(status, StatusCode::ACCEPTED);
                None
            } else {
                let (status, body) = send(&s, ask(Q1)).await;
                assert_eq!(status, StatusCode::OK);
                Some((body["value_cents"].as_i64().unwrap(), body["citations"][0]["text"].as_str().unwrap().to_string()))
            }
        }));
    }
    for t in tasks {
        if let Some((cents, text)) = t.await.unwrap() {
            match cents {
                25000 => assert!(text.ends_with("$250.00.")),
                99900 => assert!(text.ends_with("$999.00.")),
                other => panic!("torn answer {other}"),
            }
        }
    }
    let (_, body) = send(&s, ask(Q1)).await;
    assert_eq!(body["value_cents"], 99900);
}

#[tokio::test]
async fn answers_are_stable_for_a_snapshot() {
    let s = state(ServiceConfig::default());
    send(&s, post_text("/documents", benchmark_manifest())).await;
    let a = send(&s, ask("What is the out of pocket maximum for you and your partner in Oct?")).await;
    let b = send(&s, ask("What is the out of pocket maximum for you and your partner in Oct?")).await;
    assert_eq!(a, b);
    assert_eq!(a.1["value_cents"], 100000);
}

#[tokio::test]
async fn knowledge_base_persists_across_restarts() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig { kb_path: Some(dir.path().join("service.kb")), ..ServiceConfig::default() };
    let s = state(config.clone());
    let (_, summary) = send(&s, post_text("/documents", benchmark_manifest())).await;
    drop(s);
    let restarted = state(config);
    let (_, stats) = send(&restarted, get("/kb/stats")).await;
    assert_eq!(stats["chunk_count"], summary["chunk_count"]);
    assert!(stats["built_at"].as_u64().unwrap() > 0);
    let (_, body) = send(&restarted, ask(Q1)).await;
    assert_eq!(body["value_cents"], 25000);
}

#[tokio::test]
async fn mismatched_kb_file_is_a_startup_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("service.kb");
    let s = state(ServiceConfig { kb_path: Some(path.clone()), ..ServiceConfig::default() });
    send(&s, post_text("/documents", benchmark_manifest())).await;
    assert!(AppState::new(ServiceConfig { kb_path: Some(path), embedder_dim: 64, ..ServiceConfig::default() }).is_err());
}

#[tokio::test]
async fn custom_not_found_phrase() {
    let s = state(ServiceConfig { not_found_phrase: "No answer.".into(), ..ServiceConfig::default() });
    send(&s, post_text("/documents", benchmark_manifest())).await;
    let (_, body) = send(&s, ask("hello")).await;
    assert_eq!((body["status"].as_str(), body["text"].as_str()), (Some("not_found"), Some("No answer.")));
}
