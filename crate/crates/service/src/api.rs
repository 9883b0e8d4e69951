//! HTTP API under `/api/`, plus the UI assets at the root.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use puresearch_core::{canonicalize_url, LabelName, LabelRecord, LabelValue, Policy, Stance};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

use crate::app::App;
use crate::gateway::GatewayError;

#[derive(Debug)]
pub enum ApiError {
    BadRequest { kind: &'static str, message: String },
    Upstream(GatewayError),
    Storage(std::io::Error),
}

impl ApiError {
    fn bad(kind: &'static str, message: impl Into<String>) -> Self {
        ApiError::BadRequest { kind, message: message.into() }
    }
}

impl From<GatewayError> for ApiError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::EmptyQuery | GatewayError::BadLimit => ApiError::bad(e.kind(), e.to_string()),
            other => ApiError::Upstream(other),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind, message) = match self {
            ApiError::BadRequest { kind, message } => (StatusCode::BAD_REQUEST, kind, message),
            ApiError::Upstream(e) => (StatusCode::BAD_GATEWAY, e.kind(), e.to_string()),
            ApiError::Storage(e) => (StatusCode::INTERNAL_SERVER_ERROR, "storage", e.to_string()),
        };
        (status, Json(json!({ "error": kind, "message": message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Deserialize)]
struct SearchParams {
    #[serde(default)]
    q: String,
    limit: Option<String>,
}

async fn search(State(app): State<Arc<App>>, Query(p): Query<SearchParams>) -> ApiResult<Response> {
    let limit = match p.limit.as_deref() {
        None | Some("") => None,
        Some(raw) => Some(
            raw.parse::<usize>()
                .map_err(|_| ApiError::bad("bad_limit", format!("limit {raw:?} is not a number")))?,
        ),
    };
    let view = app.search(&p.q, limit).await?;
    Ok(Json(view).into_response())
}

async fn get_policy(State(app): State<Arc<App>>) -> Json<Policy> {
    Json(app.policy())
}

/// Parses `{label: "favored" | "disfavored", ...}`.
pub fn parse_policy(body: &[u8]) -> Result<Policy, ApiError> {
    let raw: BTreeMap<String, serde_json::Value> = serde_json::from_slice(body)
        .map_err(|e| ApiError::bad("bad_policy", format!("expected an object of label -> stance: {e}")))?;
    raw.into_iter()
        .map(|(label, stance)| {
            let name = LabelName::new(label.as_str())
                .map_err(|e| ApiError::bad("bad_label", format!("{label:?}: {e}")))?;
            let stance: Stance = stance
                .as_str()
                .ok_or_else(|| ApiError::bad("bad_stance", format!("{label:?}: stance must be a string")))?
                .parse()
                .map_err(|e| ApiError::bad("bad_stance", format!("{label:?}: {e}")))?;
            Ok((name, stance))
        })
        .collect()
}

async fn put_policy(State(app): State<Arc<App>>, body: Bytes) -> ApiResult<Json<Policy>> {
    let policy = parse_policy(&body)?;
    Ok(Json(app.set_policy(policy).await.map_err(ApiError::Storage)?))
}

#[derive(Deserialize)]
struct LabelsParams {
    #[serde(default)]
    url: String,
}

async fn get_labels(State(app): State<Arc<App>>, Query(p): Query<LabelsParams>) -> ApiResult<Response> {
    let item = canonicalize_url(&p.url).map_err(|e| ApiError::bad("bad_url", e.to_string()))?;
    Ok(Json(app.snapshot().labels(&item)).into_response())
}

#[derive(Deserialize)]
struct NewAssertion {
    url: String,
    label: String,
    value: serde_json::Value,
}

/// Parses `{url, label, value}` with value exactly 1 or -1.
pub fn parse_assertion(body: &[u8]) -> Result<LabelRecord, ApiError> {
    let a: NewAssertion = serde_json::from_slice(body)
        .map_err(|e| ApiError::bad("bad_assertion", format!("expected {{url, label, value}}: {e}")))?;
    let item = canonicalize_url(&a.url).map_err(|e| ApiError::bad("bad_url", e.to_string()))?;
    let label = LabelName::new(a.label).map_err(|e| ApiError::bad("bad_label", e.to_string()))?;
    let value = a
        .value
        .as_i64()
        .and_then(|v| LabelValue::try_from(v).ok())
        .ok_or_else(|| ApiError::bad("bad_value", format!("value must be 1 or -1, got {}", a.value)))?;
    Ok(LabelRecord::new(label, value, item))
}

async fn post_labels(State(app): State<Arc<App>>, body: Bytes) -> ApiResult<Response> {
    let record = parse_assertion(&body)?;
    let item = record.item.clone();
    app.add_user_assertion(record).await.map_err(ApiError::Storage)?;
    Ok(Json(app.snapshot().labels(&item)).into_response())
}

async fn get_sources(State(app): State<Arc<App>>) -> Response {
    Json(app.snapshot().sources()).into_response()
}

async fn refresh_sources(State(app): State<Arc<App>>) -> Response {
    app.refresh_all().await;
    Json(app.snapshot().sources()).into_response()
}

const PLACEHOLDER: &str = "<!doctype html><title>PURESearch</title>\
<p>The PURESearch service is running. The web UI assets are not installed; \
start with <code>--ui-dir</code> to serve them. The API lives under <code>/api/</code>.</p>";

async fn placeholder() -> Html<&'static str> {
    Html(PLACEHOLDER)
}

pub fn router(app: Arc<App>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/search", get(search))
        .route("/api/policy", get(get_policy).put(put_policy))
        .route("/api/labels", get(get_labels).post(post_labels))
        .route("/api/sources", get(get_sources))
        .route("/api/sources/refresh", post(refresh_sources))
        .with_state(app);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(placeholder)),
    }
}
