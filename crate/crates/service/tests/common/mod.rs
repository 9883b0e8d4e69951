#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::Body;
use axum::extract::OriginalUri;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use puresearch::api::router;
use puresearch::app::App;
use puresearch::config::ServiceConfig;
use puresearch::server::build_app;
use puresearch::transport::{RecordingTransport, StaticTransport, Transport};
use serde_json::Value;
use tower::ServiceExt;

pub const COOP_URL: &str = "https://coop.example/labels.tsv";
pub const CROWD_URL: &str = "https://crowd.example/labels.tsv";
pub const SOURCES: &str = "1\tcoop\thttps://coop.example/labels.tsv\n2\tcrowd\thttps://crowd.example/labels.tsv\n";

pub const FIXTURE: &str = r#"{
  "privacy": [
    {"url": "https://a.example/cookies", "title": "A", "snippet": "labeled result", "score": 10.0},
    {"url": "https://b.example/plain", "title": "B", "snippet": "unlabeled result", "score": 6.0}
  ],
  "tools": [
    {"url": "https://t1.example/", "title": "T1", "snippet": "", "score": 3.0},
    {"url": "https://t2.example/", "title": "T2", "snippet": ""},
    {"url": "https://t3.example/", "title": "T3", "snippet": "", "score": 1.0}
  ]
}"#;

pub fn config(dir: &Path, sources: Option<&str>, fixture: Option<&str>) -> ServiceConfig {
    let sources_path = sources.map(|text| {
        let p = dir.join("sources.conf");
        std::fs::write(&p, text).unwrap();
        p
    });
    let fixture_path = fixture.map(|text| {
        let p = dir.join("fixture.json");
        std::fs::write(&p, text).unwrap();
        p
    });
    ServiceConfig {
        listen: "127.0.0.1:0".parse().unwrap(),
        data_dir: dir.join("data"),
        sources: sources_path,
        upstream: "http://127.0.0.1:9/".parse().unwrap(),
        refresh_interval: Duration::from_secs(900),
        mock_upstream: fixture_path,
        fetch_timeout: Duration::from_secs(5),
        max_source_bytes: 1 << 20,
        ui_dir: None,
        allow_non_loopback: false,
    }
}

/// Service wired to the fixture upstream and canned label sources, driven
/// in-process through the router.
pub struct Harness {
    pub dir: tempfile::TempDir,
    pub sources: Arc<StaticTransport>,
    pub transport: Arc<RecordingTransport<Arc<StaticTransport>>>,
    pub app: Arc<App>,
    pub router: Router,
}

impl Harness {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        Self::in_dir(dir)
    }

    pub fn in_dir(dir: tempfile::TempDir) -> Self {
        let sources = Arc::new(StaticTransport::new());
        let transport = Arc::new(RecordingTransport::new(sources.clone()));
        let cfg = config(dir.path(), Some(SOURCES), Some(FIXTURE));
        let app = build_app(&cfg, transport.clone() as Arc<dyn Transport>).unwrap();
        let router = router(app.clone(), None);
        Self { dir, sources, transport, app, router }
    }

    /// Rebuilds the service from the same data directory.
    pub fn restart(self) -> Self {
        Self::in_dir(self.dir)
    }

    pub async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let req = Request::builder().method(method).uri(uri);
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(serde_json::to_vec(&b).unwrap())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
        let json = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
        };
        (status, json)
    }

    pub async fn get(&self, uri: &str) -> (StatusCode, Value) {
        self.call(Method::GET, uri, None).await
    }

    pub async fn post(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, uri, Some(body)).await
    }

    pub async fn put(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::PUT, uri, Some(body)).await
    }
}

pub fn source<'a>(sources: &'a Value, id: &str) -> &'a Value {
    sources
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["id"] == id)
        .unwrap_or_else(|| panic!("no source {id} in {sources}"))
}

/// Loopback HTTP server that records the path and query of every request.
pub struct RecordingServer {
    pub addr: SocketAddr,
    pub hits: Arc<Mutex<Vec<String>>>,
}

impl RecordingServer {
    pub async fn start(app: Router) -> Self {
        let hits: Arc<Mutex<Vec<String>>> = Arc::default();
        let log = hits.clone();
        let app = app.layer(axum::middleware::from_fn(move |uri: OriginalUri, req: Request<Body>, next: axum::middleware::Next| {
            let log = log.clone();
            async move {
                log.lock().unwrap().push(uri.0.to_string());
                next.run(req).await
            }
        }));
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move {
            axum::serve(listener, app).await.unwrap();
        });
        Self { addr, hits }
    }

    pub fn hits(&self) -> Vec<String> {
        self.hits.lock().unwrap().clone()
    }
}
