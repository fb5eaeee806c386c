//! JSON session API.

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use tutor_core::hint::Hint;
use tutor_core::session::{FeedbackVector, SessionError, SessionManager, SessionView};

pub type Shared = Arc<SessionManager>;

pub fn router(manager: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_state))
        .route("/sessions/{id}/steps", post(submit_step))
        .route("/sessions/{id}/hint", post(request_hint))
        .route("/exercises", get(exercises))
        .route("/theories/{name}", get(theory))
        .with_state(manager)
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::UnknownExercise(_) | SessionError::UnknownSession(_) => StatusCode::NOT_FOUND,
            SessionError::ProofComplete => StatusCode::CONFLICT,
        };
        ApiError(status, e.to_string())
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

#[derive(Deserialize)]
pub struct CreateRequest {
    pub exercise: String,
}

#[derive(Serialize)]
pub struct CreateResponse {
    pub session_id: String,
    pub state: SessionView,
}

async fn create_session(
    State(m): State<Shared>,
    Json(req): Json<CreateRequest>,
) -> Result<(StatusCode, Json<CreateResponse>), ApiError> {
    let session = m.create(&req.exercise)?;
    let state = session.lock().expect("session lock").view();
    Ok((StatusCode::CREATED, Json(CreateResponse { session_id: state.session_id.clone(), state })))
}

async fn session_state(State(m): State<Shared>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let session = m.get(&id)?;
    let view = session.lock().expect("session lock").view();
    Ok(Json(view))
}

#[derive(Deserialize)]
pub struct StepRequest {
    pub text: String,
}

#[derive(Serialize)]
pub struct StepResponse {
    pub feedback: FeedbackVector,
    pub messages: Vec<String>,
    pub proof_complete: bool,
    pub interpretations: usize,
}

async fn submit_step(
    State(m): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<StepRequest>,
) -> Result<Json<StepResponse>, ApiError> {
    let session = m.get(&id)?;
    let out = blocking(move || session.lock().expect("session lock").submit_step(&req.text)).await??;
    Ok(Json(StepResponse {
        feedback: out.feedback,
        messages: out.messages,
        proof_complete: out.proof_complete,
        interpretations: out.interpretations,
    }))
}

#[derive(Serialize)]
pub struct HintResponse {
    pub category: Option<u8>,
    pub category_name: &'static str,
    pub level: usize,
    pub text: String,
}

impl From<Hint> for HintResponse {
    fn from(h: Hint) -> Self {
        HintResponse { category: h.category, category_name: h.category_name(), level: h.level, text: h.text }
    }
}

async fn request_hint(State(m): State<Shared>, Path(id): Path<String>) -> Result<Json<HintResponse>, ApiError> {
    let session = m.get(&id)?;
    let hint = blocking(move || session.lock().expect("session lock").request_hint()).await??;
    Ok(Json(hint.into()))
}

async fn exercises(State(m): State<Shared>) -> Json<serde_json::Value> {
    let list: Vec<_> = m
        .library()
        .exercises
        .values()
        .map(|e| {
            json!({
                "id": e.id,
                "theory": e.theory,
                "goal": e.goal.to_string(),
                "strategy": e.strategy,
                "depth": e.depth_limit,
                "hints": e.hint_style,
            })
        })
        .collect();
    Json(json!(list))
}

async fn theory(State(m): State<Shared>, Path(name): Path<String>) -> Result<Json<serde_json::Value>, ApiError> {
    let t = m
        .library()
        .theories
        .get(&name)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown theory '{name}'")))?;
    let assertions: Vec<_> = t
        .assertions
        .iter()
        .map(|a| {
            json!({
                "label": a.label,
                "kind": format!("{:?}", a.kind).to_lowercase(),
                "display": t.display_name(&a.label),
                "formula": a.formula.to_string(),
            })
        })
        .collect();
    Ok(Json(json!({
        "name": t.name,
        "assertions": assertions,
        "strategies": t.strategies.names().collect::<Vec<_>>(),
        "source": t.render(),
    })))
}
