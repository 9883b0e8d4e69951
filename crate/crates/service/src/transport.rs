//! Outbound HTTP.
//!
//! Every request the service makes to another host goes through a
//! [`Transport`]: upstream search queries and label-source polls. The trait
//! only knows body-less GETs, so neither user assertions nor the policy can
//! be carried off the machine by it.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;
use thiserror::Error;
use url::Url;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FetchLimits {
    pub timeout: Duration,
    pub max_body: usize,
}

impl Default for FetchLimits {
    fn default() -> Self {
        Self { timeout: Duration::from_secs(30), max_body: 10 * 1024 * 1024 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub status: u16,
    pub body: Vec<u8>,
}

impl Fetched {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("response body exceeds {0} bytes")]
    TooLarge(usize),
    #[error("{0}")]
    Other(String),
}

#[async_trait]
pub trait Transport: Send + Sync {
    async fn get(&self, url: &Url, limits: FetchLimits) -> Result<Fetched, TransportError>;
}

/// The real network, via reqwest.
#[derive(Debug, Clone, Default)]
pub struct HttpTransport {
    client: reqwest::Client,
}

impl HttpTransport {
    pub fn new() -> Self {
        Self::default()
    }
}

fn classify(e: reqwest::Error) -> TransportError {
    if e.is_timeout() {
        TransportError::Timeout
    } else if e.is_connect() {
        TransportError::Connect(e.to_string())
    } else {
        TransportError::Other(e.to_string())
    }
}

#[async_trait]
impl Transport for HttpTransport {
    async fn get(&self, url: &Url, limits: FetchLimits) -> Result<Fetched, TransportError> {
        let fetch = async {
            let mut resp = self.client.get(url.clone()).send().await.map_err(classify)?;
            let status = resp.status().as_u16();
            if resp.content_length().is_some_and(|n| n > limits.max_body as u64) {
                return Err(TransportError::TooLarge(limits.max_body));
            }
            let mut body = Vec::new();
            while let Some(chunk) = resp.chunk().await.map_err(classify)? {
                if body.len() + chunk.len() > limits.max_body {
                    return Err(TransportError::TooLarge(limits.max_body));
                }
                body.extend_from_slice(&chunk);
            }
            Ok(Fetched { status, body })
        };
        tokio::time::timeout(limits.timeout, fetch)
            .await
            .unwrap_or(Err(TransportError::Timeout))
    }
}

/// Wraps another transport and logs every request URL it is asked for.
#[derive(Debug, Default)]
pub struct RecordingTransport<T> {
    inner: T,
    log: Mutex<Vec<Url>>,
}

impl<T> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        Self { inner, log: Mutex::new(Vec::new()) }
    }

    pub fn requests(&self) -> Vec<Url> {
        self.log.lock().unwrap().clone()
    }
}

#[async_trait]
impl<T: Transport> Transport for RecordingTransport<T> {
    async fn get(&self, url: &Url, limits: FetchLimits) -> Result<Fetched, TransportError> {
        self.log.lock().unwrap().push(url.clone());
        self.inner.get(url, limits).await
    }
}

#[async_trait]
impl<T: Transport + ?Sized> Transport for Arc<T> {
    async fn get(&self, url: &Url, limits: FetchLimits) -> Result<Fetched, TransportError> {
        (**self).get(url, limits).await
    }
}

/// Serves canned responses keyed by URL; anything else is a connection
/// failure. For tests and offline demos.
#[derive(Debug, Default)]
pub struct StaticTransport {
    routes: Mutex<std::collections::HashMap<String, Result<Fetched, TransportError>>>,
}

impl StaticTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&self, url: &str, response: Result<Fetched, TransportError>) {
        self.routes.lock().unwrap().insert(url.to_owned(), response);
    }

    pub fn ok(&self, url: &str, body: impl Into<Vec<u8>>) {
        self.set(url, Ok(Fetched { status: 200, body: body.into() }));
    }
}

#[async_trait]
impl Transport for StaticTransport {
    async fn get(&self, url: &Url, limits: FetchLimits) -> Result<Fetched, TransportError> {
        let routes = self.routes.lock().unwrap();
        match routes.get(url.as_str()) {
            Some(Ok(f)) if f.body.len() > limits.max_body => Err(TransportError::TooLarge(limits.max_body)),
            Some(r) => r.clone(),
            None => Err(TransportError::Connect(format!("no route to {url}"))),
        }
    }
}
