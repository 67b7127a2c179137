//! HTTP routes over [`MatchService`]. Every route except `/health` requires
//! `Authorization: Bearer <token>`.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;

use super::{MatchRequest, MatchService, OverrideRequest, ServiceError};
use crate::scoring::ScoringConfig;

pub const AUTH_TOKEN_ENV: &str = "MATCH_API_TOKEN";

#[derive(Clone)]
struct AppState {
    service: Arc<MatchService>,
    token: Arc<str>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, code) = match &self {
            ServiceError::BadRequest { .. } => (StatusCode::BAD_REQUEST, "bad_request"),
            ServiceError::InvalidConfig(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_config"),
            ServiceError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            ServiceError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            ServiceError::Unavailable => (StatusCode::SERVICE_UNAVAILABLE, "unavailable"),
            ServiceError::Score(_) => (StatusCode::UNPROCESSABLE_ENTITY, "unscorable"),
            ServiceError::Audit(_) => (StatusCode::INTERNAL_SERVER_ERROR, "audit_failure"),
        };
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        let mut body = json!({ "error": code, "message": self.to_string() });
        if let ServiceError::BadRequest { field, .. } = &self {
            body["field"] = json!(field);
        }
        (status, Json(body)).into_response()
    }
}

fn malformed(r: JsonRejection) -> ServiceError {
    ServiceError::BadRequest { field: "body".into(), reason: r.body_text() }
}

type ApiResult<T> = Result<Json<T>, ServiceError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Audit(std::io::Error::other(e)))?
        .map(Json)
}

async fn post_match(State(st): State<AppState>, body: Result<Json<MatchRequest>, JsonRejection>) -> impl IntoResponse {
    let Json(req) = body.map_err(malformed)?;
    blocking(move || st.service.handle_match(&req)).await
}

async fn get_config(State(st): State<AppState>) -> Json<ScoringConfig> {
    Json((*st.service.config()).clone())
}

async fn put_config(State(st): State<AppState>, body: Result<Json<ScoringConfig>, JsonRejection>) -> impl IntoResponse {
    let Json(cfg) = body.map_err(malformed)?;
    blocking(move || st.service.update_config(cfg)).await
}

async fn post_override(State(st): State<AppState>, body: Result<Json<OverrideRequest>, JsonRejection>) -> impl IntoResponse {
    let Json(req) = body.map_err(malformed)?;
    blocking(move || st.service.record_override(&req)).await
}

async fn get_analytics(State(st): State<AppState>) -> impl IntoResponse {
    Json(st.service.analytics_snapshot())
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    datasets_loaded: bool,
    model_loaded: bool,
}

async fn health(State(st): State<AppState>) -> Json<Health> {
    Json(Health { status: "ok", datasets_loaded: st.service.dataset().is_some(), model_loaded: st.service.has_model() })
}

async fn require_token(State(st): State<AppState>, req: Request, next: Next) -> Response {
    let presented = req
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    if presented.is_some_and(|t| constant_time_eq(t.as_bytes(), st.token.as_bytes())) {
        next.run(req).await
    } else {
        (StatusCode::UNAUTHORIZED, Json(json!({ "error": "unauthorized", "message": "missing or invalid bearer token" })))
            .into_response()
    }
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

pub fn router(service: Arc<MatchService>, token: &str) -> Router {
    let st = AppState { service, token: Arc::from(token) };
    let protected = Router::new()
        .route("/match", post(post_match))
        .route("/config", get(get_config).put(put_config))
        .route("/override", post(post_override))
        .route("/analytics", get(get_analytics))
        .route_layer(middleware::from_fn_with_state(st.clone(), require_token));
    Router::new().route("/health", get(health)).merge(protected).with_state(st)
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, service: Arc<MatchService>, token: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(service, token))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
