//! Upstream search engine access.
//!
//! The metasearch engine's JSON endpoint (`/search?q=...&format=json`,
//! answering `{"results": [{"url", "title", "content", "score"}, ...]}`) is
//! known only to this module; the rest of the service sees
//! [`UpstreamResult`]s in upstream order.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use async_trait::async_trait;
use axum::extract::{Query, State};
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use puresearch_core::UpstreamResult;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::transport::{FetchLimits, Transport, TransportError};

pub const DEFAULT_LIMIT: usize = 20;
pub const MAX_LIMIT: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("query is empty")]
    EmptyQuery,
    #[error("limit must be between 1 and {MAX_LIMIT}")]
    BadLimit,
    #[error("upstream unreachable: {0}")]
    Network(String),
    #[error("upstream answered with status {0}")]
    Status(u16),
    #[error("could not decode upstream response: {0}")]
    Decode(String),
}

impl GatewayError {
    /// Short machine-readable reason.
    pub fn kind(&self) -> &'static str {
        match self {
            GatewayError::EmptyQuery => "empty_query",
            GatewayError::BadLimit => "bad_limit",
            GatewayError::Network(_) => "upstream_network",
            GatewayError::Status(_) => "upstream_status",
            GatewayError::Decode(_) => "upstream_decode",
        }
    }
}

impl From<TransportError> for GatewayError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::TooLarge(_) => GatewayError::Decode(e.to_string()),
            other => GatewayError::Network(other.to_string()),
        }
    }
}

/// Trims the query and rejects it if nothing is left.
pub fn validate_query(query: &str) -> Result<&str, GatewayError> {
    let q = query.trim();
    if q.is_empty() {
        Err(GatewayError::EmptyQuery)
    } else {
        Ok(q)
    }
}

pub fn validate_limit(limit: Option<usize>) -> Result<usize, GatewayError> {
    match limit {
        None => Ok(DEFAULT_LIMIT),
        Some(n) if (1..=MAX_LIMIT).contains(&n) => Ok(n),
        Some(_) => Err(GatewayError::BadLimit),
    }
}

#[async_trait]
pub trait Upstream: Send + Sync {
    /// Results for `query` in upstream order, at most `limit` of them.
    async fn search(&self, query: &str, limit: usize) -> Result<Vec<UpstreamResult>, GatewayError>;
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    #[serde(default)]
    results: Vec<WireHit>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireHit {
    #[serde(default)]
    url: Option<String>,
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    content: Option<String>,
    #[serde(default)]
    score: Option<f64>,
}

/// Decodes an engine response. Hits without a URL are not results and are
/// skipped; missing titles and snippets become empty strings.
pub fn decode_results(body: &[u8]) -> Result<Vec<UpstreamResult>, GatewayError> {
    let resp: WireResponse = serde_json::from_slice(body).map_err(|e| GatewayError::Decode(e.to_string()))?;
    Ok(resp
        .results
        .into_iter()
        .filter_map(|h| {
            let url = h.url.filter(|u| !u.is_empty())?;
            Some(UpstreamResult {
                url,
                title: h.title.unwrap_or_default(),
                snippet: h.content.unwrap_or_default(),
                score: h.score,
            })
        })
        .collect())
}

fn encode_results(hits: &[FixtureHit]) -> Vec<u8> {
    let results: Vec<WireHit> = hits
        .iter()
        .map(|h| WireHit {
            url: Some(h.url.clone()),
            title: Some(h.title.clone()),
            content: Some(h.snippet.clone()),
            score: h.score,
        })
        .collect();
    serde_json::to_vec(&serde_json::json!({ "results": results })).expect("fixture hits serialize")
}

/// Adapter for a metasearch engine's JSON results endpoint.
pub struct SearxUpstream {
    base: Url,
    transport: Arc<dyn Transport>,
    limits: FetchLimits,
}

impl SearxUpstream {
    pub fn new(base: Url, transport: Arc<dyn Transport>, limits: FetchLimits) -> Self {
        Self { base, transport, limits }
    }

    pub fn request_url(&self, query: &str) -> Url {
        let mut url = self.base.clone();
        if let Ok(mut segments) = url.path_segments_mut() {
            segments.pop_if_empty().push("search");
        }
        url.set_query(None);
        url.query_pairs_mut().append_pair("q", query).append_pair("format", "json");
        url
    }
}

#[async_trait]
impl Upstream for SearxUpstream {
    async fn search(&self, query: &str, limit: usize) -> Result<Vec<UpstreamResult>, GatewayError> {
        let query = validate_query(query)?;
        let fetched = self.transport.get(&self.request_url(query), self.limits).await?;
        if !fetched.is_success() {
            return Err(GatewayError::Status(fetched.status));
        }
        let mut results = decode_results(&fetched.body)?;
        results.truncate(limit);
        Ok(results)
    }
}

/// One fixture entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureHit {
    pub url: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub snippet: String,
    #[serde(default)]
    pub score: Option<f64>,
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read fixture {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid fixture {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

/// Deterministic in-process upstream backed by a query -> results fixture.
#[derive(Debug, Clone, Default)]
pub struct MockUpstream {
    fixture: BTreeMap<String, Vec<FixtureHit>>,
}

impl MockUpstream {
    pub fn new(fixture: BTreeMap<String, Vec<FixtureHit>>) -> Self {
        Self { fixture }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        Ok(Self::new(serde_json::from_str(text)?))
    }

    pub fn load(path: &Path) -> Result<Self, FixtureError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| FixtureError::Io { path: display.clone(), source })?;
        Self::from_json(&text).map_err(|source| FixtureError::Parse { path: display, source })
    }

    /// The engine-format response body for `query`.
    pub fn respond(&self, query: &str) -> Vec<u8> {
        let hits = self.fixture.get(query).map(Vec::as_slice).unwrap_or(&[]);
        encode_results(hits)
    }

    /// Serves the fixture over HTTP at `/search`, in the engine's format.
    pub fn router(self: Arc<Self>) -> Router {
        #[derive(Deserialize)]
        struct Params {
            #[serde(default)]
            q: String,
        }
        async fn search(State(mock): State<Arc<MockUpstream>>, Query(p): Query<Params>) -> impl IntoResponse {
            ([(header::CONTENT_TYPE, "application/json")], mock.respond(p.q.trim()))
        }
        Router::new().route("/search", get(search)).with_state(self)
    }
}

#[async_trait]
impl Upstream for MockUpstream {
    async fn search(&self, query: &str, limit: usize) -> Result<Vec<UpstreamResult>, GatewayError> {
        let query = validate_query(query)?;
        let mut results = decode_results(&self.respond(query))?;
        results.truncate(limit);
        Ok(results)
    }
}
