//! HTTP service that hands out four-question tuples to annotators, records
//! their most/least intimate picks in an append-only journal, and exports
//! them in the judgment CSV format the scorer reads.
//!
//! | method | path | body / result |
//! |---|---|---|
//! | POST | `/sessions` | `{annotator_id, tuple_set_id}` → 201 [`SessionInfo`] |
//! | GET | `/sessions/{id}/next` | [`NextTuple`] |
//! | POST | `/sessions/{id}/judgments` | [`JudgmentRequest`] → [`Progress`] |
//! | GET | `/sessions/{id}/progress` | [`Progress`] |
//! | GET | `/tuple-sets` | list of set ids |
//! | GET | `/tuple-sets/{id}/export` | judgment CSV |
//! | GET | `/instructions` | plain text |
//!
//! Errors are `{"error": code, "message": ...}` with codes `invalid_judgment`
//! (400), `bad_request` (400), `unknown_session` / `unknown_tuple_set` (404)
//! and `out_of_order` (409).

mod store;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use thiserror::Error;
use tower_http::cors::CorsLayer;

pub use store::{
    display_order, AnnotationService, ItemView, JudgmentRequest, NextTuple, Progress, ServiceConfig, SessionInfo,
    TupleSet,
};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("unknown tuple set {0:?}")]
    UnknownTupleSet(String),
    #[error("tuple {got:?} is not the current tuple (expected {expected:?})")]
    OutOfOrder { expected: Option<String>, got: String },
    #[error("{0}")]
    InvalidJudgment(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("journal: {0}")]
    Journal(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::UnknownTupleSet(_) => "unknown_tuple_set",
            ServiceError::OutOfOrder { .. } => "out_of_order",
            ServiceError::InvalidJudgment(_) => "invalid_judgment",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Config(_) | ServiceError::Journal(_) | ServiceError::Io(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::UnknownTupleSet(_) => StatusCode::NOT_FOUND,
            ServiceError::OutOfOrder { .. } => StatusCode::CONFLICT,
            ServiceError::InvalidJudgment(_) | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if self.status().is_server_error() {
            log::error!("{self}");
        }
        let body = serde_json::json!({ "error": self.code(), "message": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

type Shared = Arc<AnnotationService>;

#[derive(Debug, Deserialize)]
struct CreateSession {
    annotator_id: String,
    tuple_set_id: String,
}

async fn create_session(State(s): State<Shared>, Json(req): Json<CreateSession>) -> Result<Response, ServiceError> {
    let info = s.create_session(&req.annotator_id, &req.tuple_set_id)?;
    Ok((StatusCode::CREATED, Json(info)).into_response())
}

async fn next_tuple(State(s): State<Shared>, Path(id): Path<String>) -> Result<Json<NextTuple>, ServiceError> {
    s.next_tuple(&id).map(Json)
}

async fn submit(
    State(s): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<JudgmentRequest>,
) -> Result<Json<Progress>, ServiceError> {
    s.submit(&id, &req).map(Json)
}

async fn progress(State(s): State<Shared>, Path(id): Path<String>) -> Result<Json<Progress>, ServiceError> {
    s.progress(&id).map(Json)
}

async fn export(State(s): State<Shared>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let body = s.export(&id)?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body).into_response())
}

async fn tuple_sets(State(s): State<Shared>) -> Json<Vec<String>> {
    Json(s.tuple_set_ids())
}

async fn instructions(State(s): State<Shared>) -> impl IntoResponse {
    (
        [(header::CONTENT_TYPE, "text/plain; charset=utf-8")],
        s.instructions().to_string(),
    )
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/next", get(next_tuple))
        .route("/sessions/{id}/judgments", post(submit))
        .route("/sessions/{id}/progress", get(progress))
        .route("/tuple-sets", get(tuple_sets))
        .route("/tuple-sets/{id}/export", get(export))
        .route("/instructions", get(instructions))
        .layer(CorsLayer::permissive())
        .with_state(service)
}

/// Serves until Ctrl-C.
pub async fn serve(service: Shared, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
