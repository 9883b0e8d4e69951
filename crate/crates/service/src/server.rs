//! Startup wiring: configuration to a running service.

use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::api::router;
use crate::app::{load_policy, App};
use crate::config::{ConfigError, ServiceConfig};
use crate::gateway::{FixtureError, MockUpstream, SearxUpstream, Upstream};
use crate::sources::{load_registry, DataDir, LoadError};
use crate::transport::{FetchLimits, Transport};

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sources(#[from] LoadError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error("invalid policy file {0}")]
    Policy(String),
    #[error("cannot use data directory: {0}")]
    DataDir(std::io::Error),
    #[error("cannot listen: {0}")]
    Bind(std::io::Error),
}

/// Loads state from disk and assembles the application. All outbound
/// traffic goes through `transport`.
pub fn build_app(config: &ServiceConfig, transport: Arc<dyn Transport>) -> Result<Arc<App>, StartupError> {
    config.validate()?;
    std::fs::create_dir_all(&config.data_dir).map_err(StartupError::DataDir)?;
    let data = DataDir::new(&config.data_dir);
    let loaded = load_registry(config.sources.as_deref(), &data)?;
    for w in &loaded.warnings {
        tracing::warn!("{w}");
    }
    let policy = load_policy(&data).map_err(StartupError::Policy)?;
    let limits = FetchLimits { timeout: config.fetch_timeout, max_body: config.max_source_bytes };
    let upstream: Arc<dyn Upstream> = match &config.mock_upstream {
        Some(fixture) => Arc::new(MockUpstream::load(fixture)?),
        None => Arc::new(SearxUpstream::new(config.upstream.clone(), transport.clone(), limits)),
    };
    Ok(Arc::new(App::new(loaded, policy, data, upstream, transport, limits)))
}

/// Refreshes every remote source now and then every `interval`.
pub fn spawn_poller(app: Arc<App>, interval: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut ticks = tokio::time::interval(interval);
        ticks.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        loop {
            ticks.tick().await;
            app.refresh_all().await;
        }
    })
}

pub async fn run(config: ServiceConfig, transport: Arc<dyn Transport>) -> Result<(), StartupError> {
    let app = build_app(&config, transport)?;
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(StartupError::Bind)?;
    tracing::info!("listening on http://{}", listener.local_addr().map_err(StartupError::Bind)?);
    let poller = spawn_poller(app.clone(), config.refresh_interval);
    let served = axum::serve(listener, router(app, config.ui_dir.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    poller.abort();
    served.map_err(StartupError::Bind)
}
