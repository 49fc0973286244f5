//! HTTP service for the editor and for scripts.
//!
//! Each session has one writer at a time. A mutation that finds the session
//! busy, or that names an `x-expected-events` count other than the current
//! one, gets 409 and changes nothing. Reads use the snapshot published after
//! the last mutation.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::analysis::{
    analyze_session, AnalysisError, DeviationOptions, DistanceOptions, RegionMap, DEFAULT_STATE_BUDGET,
};
use crate::graph::to_graph;
use crate::model::{canonicalize, from_json_value, to_json_value, ProcessModel};
use crate::patterns::{applicable_patterns, apply_pattern, Alphabet, PatternInstance};
use crate::session::{replay, Action, Outcome, Session, SessionLog};

/// Header carrying the event count a mutation expects the session to have.
pub const EXPECTED_EVENTS: &str = "x-expected-events";

#[derive(Clone, Debug)]
pub struct Config {
    pub static_dir: Option<PathBuf>,
    pub session_dir: Option<PathBuf>,
    pub state_budget: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config { static_dir: None, session_dir: None, state_budget: DEFAULT_STATE_BUDGET }
    }
}

pub struct AppState {
    config: Config,
    sessions: RwLock<HashMap<String, Arc<ApiSession>>>,
}

struct ApiSession {
    solution: Option<ProcessModel>,
    regions: Option<RegionMap>,
    live: Mutex<Session>,
    snapshot: RwLock<Arc<Snapshot>>,
}

struct Snapshot {
    log: SessionLog,
    model: ProcessModel,
}

impl ApiSession {
    fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    code: String,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, detail: impl Into<String>) -> ApiError {
        ApiError { status, code: code.to_string(), detail: detail.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": {"code": self.code, "detail": self.detail}}))).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

pub fn router(config: Config) -> Router {
    let static_dir = config.static_dir.clone();
    let state = Arc::new(AppState { config, sessions: RwLock::new(HashMap::new()) });
    let api = Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/model", get(get_model))
        .route("/sessions/{id}/applicable", get(get_applicable))
        .route("/sessions/{id}/apply", post(post_apply))
        .route("/sessions/{id}/undo", post(post_undo))
        .route("/sessions/{id}/log", get(get_log))
        .route("/sessions/{id}/replay", get(get_replay))
        .route("/sessions/{id}/analysis", get(get_analysis))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until ctrl-c.
pub async fn serve(listener: tokio::net::TcpListener, config: Config) -> std::io::Result<()> {
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn healthz() -> Json<Value> {
    Json(json!({"status": "ok", "version": env!("CARGO_PKG_VERSION")}))
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |elapsed| elapsed.as_millis() as u64)
}

fn model_view(model: &ProcessModel, events: usize) -> Value {
    json!({
        "events": events,
        "model": to_json_value(model),
        "notation": model.to_string(),
        "digest": canonicalize(model).digest,
        "graph": to_graph(model),
    })
}

fn find(state: &AppState, id: &str) -> Result<Arc<ApiSession>, ApiError> {
    state
        .sessions
        .read()
        .expect("sessions lock")
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_SESSION", format!("no session {id}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    #[serde(default)]
    task_id: String,
    #[serde(default)]
    alphabet: Option<Alphabet>,
    /// Model document or compact notation.
    #[serde(default)]
    solution: Option<Value>,
    #[serde(default)]
    regions: Option<Value>,
}

fn unprocessable(code: &str, detail: impl ToString) -> ApiError {
    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, detail.to_string())
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let request: CreateSession = serde_json::from_slice(&body).map_err(|error| unprocessable("MALFORMED_REQUEST", error))?;
    let solution = match request.solution {
        None => None,
        Some(Value::String(text)) => Some(super::parse_model(&text).map_err(|error| unprocessable("INVALID_SOLUTION", error))?),
        Some(value) => Some(from_json_value(value).map_err(|error| unprocessable("INVALID_SOLUTION", error))?),
    };
    let regions = match request.regions {
        None => None,
        Some(value) => {
            let regions = RegionMap::from_json(&value.to_string()).map_err(|error| unprocessable("INVALID_REGIONS", error))?;
            let solution = solution
                .as_ref()
                .ok_or_else(|| unprocessable("INVALID_REGIONS", "regions need a solution"))?;
            regions.validate(solution).map_err(|error| unprocessable("INVALID_REGIONS", error))?;
            Some(regions)
        }
    };
    let alphabet = match (request.alphabet, &solution) {
        (Some(alphabet), _) => alphabet,
        (None, Some(solution)) => Alphabet::of_model(solution),
        (None, None) => Alphabet::default(),
    };
    let id = uuid::Uuid::new_v4().to_string();
    let log = SessionLog::new(&id, &request.task_id, alphabet);
    let session = Session::new(log.clone()).expect("an empty log replays");
    let snapshot = Snapshot { log, model: ProcessModel::new_empty() };
    let view = model_view(&snapshot.model, 0);
    let entry = ApiSession {
        solution,
        regions,
        live: Mutex::new(session),
        snapshot: RwLock::new(Arc::new(snapshot)),
    };
    persist(&state, &id, &entry.snapshot().log);
    state.sessions.write().expect("sessions lock").insert(id.clone(), Arc::new(entry));
    let mut body = view;
    body["session_id"] = Value::String(id);
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

fn persist(state: &AppState, id: &str, log: &SessionLog) {
    if let Some(dir) = &state.config.session_dir {
        // Persistence is best effort; the in-memory log stays authoritative.
        let _ = std::fs::write(dir.join(format!("{id}.jsonl")), log.to_jsonl());
    }
}

async fn get_model(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let snapshot = find(&state, &id)?.snapshot();
    Ok(Json(model_view(&snapshot.model, snapshot.log.len())).into_response())
}

async fn get_applicable(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let snapshot = find(&state, &id)?.snapshot();
    Ok(Json(applicable_patterns(&snapshot.model, Some(&snapshot.log.alphabet))).into_response())
}

/// Records one action under the session's writer lock and publishes the new
/// snapshot. Failed actions are recorded too and reported as 422, with
/// `detail` explaining the failure when the caller knows more.
fn mutate(
    state: &AppState,
    id: &str,
    headers: &HeaderMap,
    act: impl FnOnce(&ProcessModel) -> (Action, Option<String>),
) -> ApiResult {
    let session = find(state, id)?;
    let mut live = match session.live.try_lock() {
        Ok(live) => live,
        Err(std::sync::TryLockError::WouldBlock) => {
            return Err(ApiError::new(StatusCode::CONFLICT, "CONCURRENT_MUTATION", "another change is in progress"));
        }
        Err(std::sync::TryLockError::Poisoned(poisoned)) => poisoned.into_inner(),
    };
    let events = live.log().len();
    if let Some(expected) = headers.get(EXPECTED_EVENTS) {
        let expected: usize = expected
            .to_str()
            .ok()
            .and_then(|text| text.trim().parse().ok())
            .ok_or_else(|| unprocessable("MALFORMED_REQUEST", format!("{EXPECTED_EVENTS} must be a count")))?;
        if expected != events {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "STALE_STATE",
                format!("expected {expected} events, session has {events}"),
            ));
        }
    }
    let (action, detail) = act(live.model());
    let outcome = live.record(action, now_ms()).outcome;
    let snapshot = Snapshot { log: live.log().clone(), model: live.model().clone() };
    persist(state, id, &snapshot.log);
    let view = model_view(&snapshot.model, snapshot.log.len());
    *session.snapshot.write().expect("snapshot lock") = Arc::new(snapshot);
    drop(live);
    match outcome {
        Outcome::Ok => Ok(Json(view).into_response()),
        Outcome::Error(code) => {
            let code = serde_json::to_value(code).expect("codes serialize");
            let detail = detail.map_or_else(String::new, |detail| detail + " ");
            Err(unprocessable(code.as_str().unwrap_or("ERROR"), format!("{detail}(recorded as event {events})")))
        }
    }
}

async fn post_apply(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    find(&state, &id)?;
    let pattern: PatternInstance =
        serde_json::from_slice(&body).map_err(|error| unprocessable("MALFORMED_PATTERN", error))?;
    mutate(&state, &id, &headers, |model| {
        let detail = apply_pattern(model, &pattern).err().map(|error| error.detail);
        (Action::Apply { pattern }, detail)
    })
}

async fn post_undo(State(state): State<Arc<AppState>>, Path(id): Path<String>, headers: HeaderMap) -> ApiResult {
    mutate(&state, &id, &headers, |_| (Action::Undo, Some("no applied pattern left to revert".into())))
}

async fn get_log(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let snapshot = find(&state, &id)?.snapshot();
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], snapshot.log.to_jsonl()).into_response())
}

#[derive(Deserialize)]
struct StepQuery {
    step: Option<usize>,
}

async fn get_replay(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<StepQuery>,
) -> ApiResult {
    let snapshot = find(&state, &id)?.snapshot();
    let step = query.step.unwrap_or(snapshot.log.len());
    let model = replay(&snapshot.log, step).map_err(|error| unprocessable("STEP_OUT_OF_RANGE", error))?;
    Ok(Json(model_view(&model, step)).into_response())
}

async fn get_analysis(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let session = find(&state, &id)?;
    let Some(solution) = session.solution.clone() else {
        return Err(unprocessable("NO_SOLUTION", "the session was created without a solution"));
    };
    let snapshot = session.snapshot();
    let regions = session.regions.clone();
    let options = DeviationOptions {
        distance: DistanceOptions { enumerate_limit: 1, state_budget: state.config.state_budget },
        ..DeviationOptions::default()
    };
    let report = tokio::task::spawn_blocking(move || analyze_session(&snapshot.log, &solution, regions.as_ref(), &options))
        .await
        .map_err(|error| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", error.to_string()))?;
    match report {
        Ok(report) => Ok(([(header::CONTENT_TYPE, "application/json")], report.to_json()).into_response()),
        Err(error @ AnalysisError::BudgetExceeded { .. }) => Err(unprocessable("BUDGET_EXCEEDED", error)),
        Err(error) => Err(unprocessable("ANALYSIS_FAILED", error)),
    }
}
