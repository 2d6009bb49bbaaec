use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::service::{ChatService, ServiceError, SessionOverrides};
use crate::API_VERSION;

#[derive(Clone, Debug)]
pub struct ServeOptions {
    pub addr: SocketAddr,
    /// Allowed browser origin; any origin when unset.
    pub cors_origin: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MessageBody {
    text: String,
}

struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "bad_request",
            message: message.into(),
        }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let (status, code) = match &e {
            ServiceError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            ServiceError::UnknownCatalog(_) => (StatusCode::NOT_FOUND, "unknown_catalog"),
            ServiceError::Busy(_) => (StatusCode::CONFLICT, "busy"),
            ServiceError::InvalidOverride(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        ApiError {
            status,
            code,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(json!({
            "v": API_VERSION,
            "error": { "code": self.code, "message": self.message },
        }));
        let mut resp = (self.status, body).into_response();
        if self.status == StatusCode::CONFLICT {
            resp.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from_static("1"));
        }
        resp
    }
}

fn parse_body<T: for<'de> Deserialize<'de> + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

/// Model work is CPU-bound; keep it off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        code: "internal",
        message: e.to_string(),
    })?
    .map_err(ApiError::from)
}

async fn healthz(State(svc): State<Arc<ChatService>>) -> impl IntoResponse {
    Json(json!({
        "v": API_VERSION,
        "status": "ok",
        "catalog": svc.config().catalog_name,
        "items": svc.catalog().len(),
        "sessions": svc.session_count(),
    }))
}

async fn create_session(State(svc): State<Arc<ChatService>>, body: Bytes) -> Result<Response, ApiError> {
    let overrides: SessionOverrides = parse_body(&body)?;
    let created = svc.create_session(&overrides)?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn post_message(
    State(svc): State<Arc<ChatService>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let msg: MessageBody = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request(format!("expected {{\"text\": ...}}: {e}")))?;
    let reply = blocking(move || svc.handle_message(&id, &msg.text)).await?;
    Ok(Json(reply).into_response())
}

async fn get_posterior(State(svc): State<Arc<ChatService>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(svc.get_posterior(&id)?).into_response())
}

async fn get_transcript(State(svc): State<Arc<ChatService>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let turns = svc.transcript(&id)?;
    Ok(Json(json!({ "v": API_VERSION, "session": id, "turns": turns })).into_response())
}

pub fn router(service: Arc<ChatService>, cors_origin: Option<&str>) -> Router {
    let origin = match cors_origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/messages", post(post_message))
        .route("/sessions/{id}/posterior", get(get_posterior))
        .route("/sessions/{id}/transcript", get(get_transcript))
        .layer(cors)
        .with_state(service)
}

/// Serve until the process is stopped.
pub async fn serve(service: Arc<ChatService>, options: ServeOptions) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(options.addr).await?;
    axum::serve(listener, router(service, options.cors_origin.as_deref())).await
}
