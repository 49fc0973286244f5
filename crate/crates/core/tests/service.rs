mod common;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::*;
use patternbench::service::cli::run;
use patternbench::service::http::{router, Config, EXPECTED_EVENTS};
use patternbench::model::{Condition, NodeId};
use patternbench::patterns::PatternInstance;
use patternbench::session::SessionLog;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>, headers: &[(&str, &str)]) -> (StatusCode, Vec<u8>) {
    let mut request = Request::builder().method(method).uri(uri);
    for (name, value) in headers {
        request = request.header(*name, *value);
    }
    let body = match body {
        Some(value) => {
            request = request.header("content-type", "application/json");
            Body::from(value.to_string())
        }
        None => Body::empty(),
    };
    let response = app.clone().oneshot(request.body(body).unwrap()).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn json_call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body, &[]).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn create(app: &Router, body: Value) -> String {
    let (status, view) = json_call(app, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{view}");
    view["session_id"].as_str().unwrap().to_string()
}

fn insert(label: &str, index: usize) -> Value {
    json!({"kind": "serial_insert", "params": {"label": label, "anchor": {"gap": {"sequence": 0, "index": index}}}})
}

fn app() -> Router {
    router(Config::default())
}

#[tokio::test]
async fn health_reports_the_version() {
    let (status, body) = json_call(&app(), Method::GET, "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["version"], env!("CARGO_PKG_VERSION"));
}

#[tokio::test]
async fn insert_into_a_new_session() {
    let app = app();
    let id = create(&app, json!({"task_id": "t", "alphabet": {"labels": ["A"], "conditions": []}})).await;
    let (status, _) = json_call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(insert("A", 0))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, view) = json_call(&app, Method::GET, &format!("/sessions/{id}/model"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["notation"], "SEQ(A)");
    assert_eq!(view["events"], 1);
}

#[tokio::test]
async fn refused_update_is_422_and_logged() {
    let app = app();
    let id = create(&app, json!({})).await;
    let update = json!({"kind": "update_condition", "params": {"edge": 0, "condition": "c"}});
    let (status, body) = json_call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(update)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "PRECONDITION_VIOLATED");
    let (_, log) = call(&app, Method::GET, &format!("/sessions/{id}/log"), None, &[]).await;
    let log = SessionLog::from_jsonl(std::str::from_utf8(&log).unwrap()).unwrap();
    assert_eq!(log.len(), 1);
    assert!(!log.events[0].outcome.is_ok());
}

#[tokio::test]
async fn optimal_construction_analyzes_to_zero() {
    let app = app();
    let id = create(&app, json!({"task_id": "r4", "solution": fixture("r4.model").trim()})).await;
    for step in r4_steps() {
        let pattern = serde_json::to_value(&step).unwrap();
        let (status, body) = json_call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(pattern)).await;
        assert_eq!(status, StatusCode::OK, "{body}");
    }
    let (status, report) = json_call(&app, Method::GET, &format!("/sessions/{id}/analysis"), None).await;
    assert_eq!(status, StatusCode::OK, "{report}");
    assert_eq!(report["process_deviations"], 0);
    assert_eq!(report["product_deviations"], 0);
}

#[tokio::test]
async fn errors_use_their_status_codes() {
    let app = app();
    let (status, body) = json_call(&app, Method::GET, "/sessions/nope/model", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "UNKNOWN_SESSION");

    let id = create(&app, json!({})).await;
    let (status, body) = json_call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(json!({"kind": "teleport"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "MALFORMED_PATTERN");

    let (status, body) = json_call(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "NOTHING_TO_UNDO");

    let (status, body) = json_call(&app, Method::GET, &format!("/sessions/{id}/analysis"), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "NO_SOLUTION");

    let (status, body) = json_call(&app, Method::POST, "/sessions", Some(json!({"solution": "SEQ(XOR(A))"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "INVALID_SOLUTION");
}

#[tokio::test]
async fn stale_writers_get_409() {
    let app = app();
    let id = create(&app, json!({})).await;
    let uri = format!("/sessions/{id}/apply");
    let body = Some(insert("A", 0));
    let (status, _) = call(&app, Method::POST, &uri, body.clone(), &[(EXPECTED_EVENTS, "0")]).await;
    assert_eq!(status, StatusCode::OK);
    let (status, bytes) = call(&app, Method::POST, &uri, body, &[(EXPECTED_EVENTS, "0")]).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let error: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(error["error"]["code"], "STALE_STATE");
    let (_, view) = json_call(&app, Method::GET, &format!("/sessions/{id}/model"), None).await;
    assert_eq!(view["events"], 1);
}

#[tokio::test]
async fn every_listed_pattern_applies() {
    let app = app();
    let id = create(&app, json!({"solution": fixture("task_a.model").trim()})).await;
    // Grow the model a little so every pattern kind has a target.
    for pattern in [insert("A", 0), insert("B", 1)] {
        assert_eq!(json_call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(pattern)).await.0, StatusCode::OK);
    }
    let embed = serde_json::to_value(PatternInstance::EmbedInConditional { target: NodeId(2), condition: Condition::Unset }).unwrap();
    let (status, body) = json_call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(embed)).await;
    assert_eq!(status, StatusCode::OK, "{body}");

    let (_, listed) = json_call(&app, Method::GET, &format!("/sessions/{id}/applicable"), None).await;
    let listed = listed.as_array().unwrap().clone();
    assert!(listed.len() > 20);
    for pattern in listed {
        let (status, body) = json_call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(pattern.clone())).await;
        assert_eq!(status, StatusCode::OK, "{pattern} {body}");
        let (status, _) = json_call(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
        assert_eq!(status, StatusCode::OK);
    }
}

#[tokio::test]
async fn http_log_replays_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Config { session_dir: Some(dir.path().to_path_buf()), ..Config::default() });
    let id = create(&app, json!({"solution": fixture("r4.model").trim()})).await;
    let mut digests = vec![];
    let (_, view) = json_call(&app, Method::GET, &format!("/sessions/{id}/model"), None).await;
    digests.push(view["digest"].as_str().unwrap().to_string());
    let mut steps: Vec<Value> = r4_steps().iter().map(|s| serde_json::to_value(s).unwrap()).collect();
    steps.insert(2, json!({"kind": "delete_fragment", "params": {"target": 99}}));
    for pattern in steps {
        json_call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(pattern)).await;
        let (_, view) = json_call(&app, Method::GET, &format!("/sessions/{id}/model"), None).await;
        digests.push(view["digest"].as_str().unwrap().to_string());
    }
    json_call(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
    let (_, view) = json_call(&app, Method::GET, &format!("/sessions/{id}/model"), None).await;
    digests.push(view["digest"].as_str().unwrap().to_string());

    let (_, log) = call(&app, Method::GET, &format!("/sessions/{id}/log"), None, &[]).await;
    let path = dir.path().join("fetched.jsonl");
    std::fs::write(&path, &log).unwrap();
    let persisted = std::fs::read(dir.path().join(format!("{id}.jsonl"))).unwrap();
    assert_eq!(persisted, log);

    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(["patternbench", "replay", path.to_str().unwrap(), "--digests"], &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    let lines: Vec<String> = String::from_utf8(out).unwrap().lines().map(str::to_string).collect();
    assert_eq!(lines.len(), digests.len());
    for (line, digest) in lines.iter().zip(&digests) {
        assert!(line.ends_with(digest.as_str()), "{line} vs {digest}");
    }

    let (status, view) = json_call(&app, Method::GET, &format!("/sessions/{id}/replay?step=1"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["digest"].as_str().unwrap(), digests[1]);
    let (status, _) = json_call(&app, Method::GET, &format!("/sessions/{id}/replay?step=99"), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

// Concurrent writers either land in the log or are turned away; nothing
// is lost or interleaved.
#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_mutations_are_serialized() {
    let app = app();
    let id = create(&app, json!({})).await;
    let tasks: Vec<_> = (0..32)
        .map(|k| {
            let app = app.clone();
            let uri = format!("/sessions/{id}/apply");
            tokio::spawn(async move { json_call(&app, Method::POST, &uri, Some(insert(&format!("L{k}"), 0))).await.0 })
        })
        .collect();
    let mut accepted = 0;
    for task in tasks {
        let status = task.await.unwrap();
        assert!(status == StatusCode::OK || status == StatusCode::CONFLICT, "{status}");
        accepted += usize::from(status == StatusCode::OK);
    }
    let (_, log) = call(&app, Method::GET, &format!("/sessions/{id}/log"), None, &[]).await;
    let log = SessionLog::from_jsonl(std::str::from_utf8(&log).unwrap()).unwrap();
    assert_eq!(log.len(), accepted);
    assert!(log.events.iter().enumerate().all(|(k, event)| event.seq == k as u64 && event.outcome.is_ok()));
    let (_, view) = json_call(&app, Method::GET, &format!("/sessions/{id}/model"), None).await;
    let final_model = patternbench::session::replay(&log, log.len()).unwrap();
    assert_eq!(view["notation"], final_model.to_string());
}
