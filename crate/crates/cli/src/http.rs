//! HTTP binding of the session protocol.
//!
//! | method | path                  | body                                |
//! |--------|-----------------------|-------------------------------------|
//! | POST   | `/sessions`           | `CreateRequest` or a bare config    |
//! | GET    | `/sessions/{id}`      |                                     |
//! | POST   | `/sessions/{id}/move` | `{"target": j}` or `{"wait": true}` |
//! | DELETE | `/sessions/{id}`      |                                     |
//!
//! Errors come back as `{"error": {"code": "...", "message": "..."}}` with
//! codes `unknown_session` (404), `illegal_move` (409) and
//! `malformed_config` (400).

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;

use crate::session::{parse_move, CreateRequest, ServiceError, SessionStore};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.code.status()).unwrap_or(StatusCode::BAD_REQUEST);
        (status, Json(json!({"error": {"code": self.code, "message": self.message}}))).into_response()
    }
}

async fn create(State(store): State<Arc<SessionStore>>, body: Bytes) -> Result<Response, ServiceError> {
    let req = CreateRequest::parse(&body)?;
    // solving can take a while on larger layouts
    let created = tokio::task::spawn_blocking(move || store.create(&req))
        .await
        .expect("session creation does not panic")?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn state(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(store.poll(&id)?).into_response())
}

async fn step(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let action = parse_move(&body)?;
    Ok(Json(store.apply(&id, action)?).into_response())
}

async fn close(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    store.close(&id)?;
    Ok(Json(json!({"closed": id})).into_response())
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(state).delete(close))
        .route("/sessions/{id}/move", post(step))
        .with_state(store)
}

pub async fn serve(addr: std::net::SocketAddr, store: Arc<SessionStore>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
