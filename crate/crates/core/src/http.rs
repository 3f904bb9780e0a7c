//! JSON-over-HTTP front end.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | POST | `/v1/sessions` | `{"seed": 7}` (optional) | session summary, 201 |
//! | POST | `/v1/sessions/{id}/turns` | `{"text": "...", "asr_hypotheses": [...]}` | turn response |
//! | GET | `/v1/sessions/{id}` | | session summary with transcript |
//! | DELETE | `/v1/sessions/{id}` | | session summary |
//! | GET | `/v1/health` | | status and resource counts |
//!
//! Errors are `{"error": <code>, "message": <text>}` with 400 for bad
//! input, 404 for unknown sessions and 409 for ended sessions.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, EngineError, SessionInfo, TurnResponse};
use crate::nlu::TurnInput;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub entities: usize,
    pub content_items: usize,
    pub flows: usize,
    pub stories: usize,
    pub sessions: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let (status, code) = match &e {
            EngineError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            EngineError::SessionEnded(_) => (StatusCode::CONFLICT, "session_ended"),
            EngineError::Input(_) => (StatusCode::BAD_REQUEST, "invalid_input"),
            EngineError::Resource(_) | EngineError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        ApiError { status, code, message: e.to_string() }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, code: "invalid_input", message: e.body_text() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody { error: self.code.to_string(), message: self.message };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs blocking engine work off the async workers.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> Result<T, EngineError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::from(EngineError::Internal(e.to_string())))?
        .map_err(ApiError::from)
}

async fn create_session(
    State(engine): State<Arc<Engine>>,
    body: Result<Option<Json<CreateSession>>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionInfo>)> {
    let seed = body?.and_then(|Json(b)| b.seed);
    let info = blocking(move || engine.create_session(seed)).await?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn take_turn(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    body: Result<Json<TurnInput>, JsonRejection>,
) -> ApiResult<Json<TurnResponse>> {
    let Json(input) = body?;
    let has_text = input.text.as_deref().is_some_and(|t| !t.trim().is_empty());
    let has_asr = input.asr_hypotheses.as_ref().is_some_and(|h| !h.is_empty());
    if !has_text && !has_asr {
        return Err(EngineError::Input("either `text` or `asr_hypotheses` is required".into()).into());
    }
    let response = blocking(move || engine.handle_turn(&id, &input)).await?;
    Ok(Json(response))
}

async fn get_session(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> ApiResult<Json<SessionInfo>> {
    Ok(Json(engine.session_info(&id)?))
}

async fn end_session(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> ApiResult<Json<SessionInfo>> {
    Ok(Json(blocking(move || engine.end_session(&id)).await?))
}

async fn health(State(engine): State<Arc<Engine>>) -> Json<Health> {
    let res = engine.resources();
    Json(Health {
        status: "ok".into(),
        entities: res.graph.len(),
        content_items: res.index.len(),
        flows: res.flows.len(),
        stories: res.stories.len(),
        sessions: engine.session_count(),
    })
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(get_session).delete(end_session))
        .route("/v1/sessions/{id}/turns", post(take_turn))
        .with_state(engine)
}

/// Serves the API until ctrl-c.
pub async fn serve(engine: Arc<Engine>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(engine))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
