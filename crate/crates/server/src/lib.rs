//! HTTP/JSON front end for the simulator.
//!
//! Stateless endpoints (`/v1/run`, `/v1/difftest`, `/v1/perf`) take a whole
//! request and return a report. Session endpoints keep a loaded array between
//! calls so a matrix is stored once and vectors are streamed against it.
//! Simulation runs on the blocking pool.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use ppac_core::controller::{ModeResult, PlaProgram, StoredMatrixLayout};
use ppac_core::difftest::{run_difftest, DifftestConfig};
use ppac_core::textfmt::IntMatrix;
use ppac_core::workload::{self, PerfRequest, RunRequest};
use ppac_core::{ArrayGeometry, Error, NumberFormat, Session, SimOptions};

/// Error body returned with every non-2xx status.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
}

#[derive(Debug)]
pub enum ServiceError {
    Core(Error),
    NoSession(u64),
    Internal(String),
}

impl From<Error> for ServiceError {
    fn from(e: Error) -> Self {
        ServiceError::Core(e)
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, code, message) = match self {
            ServiceError::Core(e) => (StatusCode::BAD_REQUEST, e.code().to_string(), e.to_string()),
            ServiceError::NoSession(id) => (
                StatusCode::NOT_FOUND,
                "E_SESSION".into(),
                format!("no session {id}"),
            ),
            ServiceError::Internal(m) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "E_INTERNAL".into(), m)
            }
        };
        (status, Json(ApiError { code, message })).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ServiceError>;

#[derive(Default)]
pub struct AppState {
    next_id: AtomicU64,
    sessions: Mutex<HashMap<u64, Arc<Mutex<Session>>>>,
}

type Shared = Arc<AppState>;

async fn blocking<T, F>(f: F) -> Result<T, ServiceError>
where
    F: FnOnce() -> Result<T, Error> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
        .map_err(ServiceError::Core)
}

fn lookup(state: &AppState, id: u64) -> Result<Arc<Mutex<Session>>, ServiceError> {
    state
        .sessions
        .lock()
        .expect("session table poisoned")
        .get(&id)
        .cloned()
        .ok_or(ServiceError::NoSession(id))
}

async fn with_session<T, F>(state: &AppState, id: u64, f: F) -> ApiResult<T>
where
    F: FnOnce(&mut Session) -> Result<T, Error> + Send + 'static,
    T: Send + 'static,
{
    let session = lookup(state, id)?;
    let out = blocking(move || {
        let mut guard = session.lock().expect("session poisoned");
        f(&mut guard)
    })
    .await?;
    Ok(Json(out))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    pub geometry: ArrayGeometry,
    #[serde(default)]
    pub options: Option<SimOptions>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: u64,
    pub geometry: ArrayGeometry,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadMatrix {
    pub matrix: IntMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetBias {
    pub bias: Vec<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrepareRegN {
    pub vector_format: NumberFormat,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cycles {
    pub cycles: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vectors {
    pub vectors: IntMatrix,
    /// Per-row thresholds for similarity-match lookups.
    #[serde(default)]
    pub thresholds: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Assignments {
    pub assignments: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Results {
    pub results: Vec<ModeResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

async fn create_session(
    State(state): State<Shared>,
    Json(req): Json<CreateSession>,
) -> ApiResult<SessionInfo> {
    let session = Session::new(req.geometry, req.options.unwrap_or_default())?;
    let id = state.next_id.fetch_add(1, Ordering::Relaxed) + 1;
    state
        .sessions
        .lock()
        .expect("session table poisoned")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok(Json(SessionInfo {
        id,
        geometry: req.geometry,
    }))
}

async fn delete_session(
    State(state): State<Shared>,
    Path(id): Path<u64>,
) -> Result<StatusCode, ServiceError> {
    state
        .sessions
        .lock()
        .expect("session table poisoned")
        .remove(&id)
        .map(|_| StatusCode::NO_CONTENT)
        .ok_or(ServiceError::NoSession(id))
}

async fn load_matrix(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<LoadMatrix>,
) -> ApiResult<StoredMatrixLayout> {
    with_session(&state, id, move |s| {
        s.load_matrix(&req.matrix.rows, req.matrix.format)
    })
    .await
}

async fn set_bias(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<SetBias>,
) -> ApiResult<()> {
    with_session(&state, id, move |s| s.set_bias(&req.bias)).await
}

async fn prepare_reg_n(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<PrepareRegN>,
) -> ApiResult<Cycles> {
    with_session(&state, id, move |s| {
        Ok(Cycles {
            cycles: s.prepare_reg_n(req.vector_format)?,
        })
    })
    .await
}

async fn mvp(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<Vectors>,
) -> ApiResult<Results> {
    with_session(&state, id, move |s| {
        let results = s.run_mvp_batch(req.vectors.format, &req.vectors.rows)?;
        Ok(Results { results })
    })
    .await
}

async fn hamming(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<Vectors>,
) -> ApiResult<Results> {
    with_session(&state, id, move |s| {
        let results = s.run_hamming(&workload::to_words(&req.vectors)?)?;
        Ok(Results { results })
    })
    .await
}

async fn cam(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<Vectors>,
) -> ApiResult<Results> {
    with_session(&state, id, move |s| {
        let xs = workload::to_words(&req.vectors)?;
        let results = match &req.thresholds {
            Some(t) => s.run_cam(&xs, t)?,
            None => s.run_cam_complete(&xs)?,
        };
        Ok(Results { results })
    })
    .await
}

async fn gf2(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<Vectors>,
) -> ApiResult<Results> {
    with_session(&state, id, move |s| {
        let results = s.run_gf2(&workload::to_words(&req.vectors)?)?;
        Ok(Results { results })
    })
    .await
}

async fn program_pla(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(program): Json<PlaProgram>,
) -> ApiResult<()> {
    with_session(&state, id, move |s| s.program_pla(&program)).await
}

async fn eval_pla(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<Assignments>,
) -> ApiResult<Results> {
    with_session(&state, id, move |s| {
        Ok(Results {
            results: s.run_pla(&req.assignments)?,
        })
    })
    .await
}

async fn run(Json(req): Json<RunRequest>) -> ApiResult<workload::RunReport> {
    Ok(Json(blocking(move || workload::execute(&req)).await?))
}

async fn difftest(
    Json(req): Json<DifftestConfig>,
) -> ApiResult<ppac_core::difftest::DifftestSummary> {
    Ok(Json(blocking(move || run_difftest(&req)).await?))
}

async fn perf(Json(req): Json<PerfRequest>) -> ApiResult<workload::PerfReport> {
    Ok(Json(workload::perf_report(&req)?))
}

pub fn router() -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/run", post(run))
        .route("/v1/difftest", post(difftest))
        .route("/v1/perf", post(perf))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", axum::routing::delete(delete_session))
        .route("/v1/sessions/{id}/matrix", post(load_matrix))
        .route("/v1/sessions/{id}/bias", post(set_bias))
        .route("/v1/sessions/{id}/reg-n", post(prepare_reg_n))
        .route("/v1/sessions/{id}/mvp", post(mvp))
        .route("/v1/sessions/{id}/hamming", post(hamming))
        .route("/v1/sessions/{id}/cam", post(cam))
        .route("/v1/sessions/{id}/gf2", post(gf2))
        .route("/v1/sessions/{id}/pla/program", post(program_pla))
        .route("/v1/sessions/{id}/pla/eval", post(eval_pla))
        .with_state(Arc::new(AppState::default()))
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}
