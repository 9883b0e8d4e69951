//! Command line and environment configuration.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use clap::Parser;
use thiserror::Error;
use url::Url;

/// Local search proxy that re-ranks results using labels from tiered,
/// partially trusted sources.
///
/// Every flag can also be set through the environment variable shown; flags
/// take precedence.
#[derive(Debug, Clone, Parser)]
#[command(name = "puresearch", version)]
pub struct ServiceConfig {
    /// Address to serve the UI and API on.
    #[arg(long, env = "PURE_LISTEN", default_value = "127.0.0.1:8642")]
    pub listen: SocketAddr,

    /// Directory for the user's labels, cached source labels and policy.
    #[arg(long, env = "PURE_DATA_DIR", default_value = "puresearch-data")]
    pub data_dir: PathBuf,

    /// Sources config: one `tier<TAB>id<TAB>url` line per source.
    #[arg(long, env = "PURE_SOURCES")]
    pub sources: Option<PathBuf>,

    /// Base URL of the upstream metasearch engine.
    #[arg(long, env = "PURE_UPSTREAM", default_value = "http://127.0.0.1:8888/")]
    pub upstream: Url,

    /// How often remote label sources are polled, e.g. `15m` or `90s`.
    #[arg(long, env = "PURE_REFRESH_INTERVAL", default_value = "15m", value_parser = humantime::parse_duration)]
    pub refresh_interval: Duration,

    /// Serve results from a query -> results JSON fixture instead of the
    /// upstream engine.
    #[arg(long, env = "PURE_MOCK_UPSTREAM", value_name = "FIXTURE")]
    pub mock_upstream: Option<PathBuf>,

    /// Timeout for each upstream query and source poll.
    #[arg(long, env = "PURE_FETCH_TIMEOUT", default_value = "30s", value_parser = humantime::parse_duration)]
    pub fetch_timeout: Duration,

    /// Largest label file accepted from a remote source, in bytes.
    #[arg(long, env = "PURE_MAX_SOURCE_BYTES", default_value_t = 10 * 1024 * 1024)]
    pub max_source_bytes: usize,

    /// Directory holding the built web UI.
    #[arg(long, env = "PURE_UI_DIR")]
    pub ui_dir: Option<PathBuf>,

    /// Permit listening on a non-loopback address. The service has no
    /// authentication; anyone who can reach it can read and change labels.
    #[arg(long, env = "PURE_ALLOW_NON_LOOPBACK")]
    pub allow_non_loopback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("refusing to listen on non-loopback address {0} without --allow-non-loopback")]
    NonLoopback(SocketAddr),
    #[error("--refresh-interval must be positive")]
    ZeroInterval,
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.listen.ip().is_loopback() && !self.allow_non_loopback {
            return Err(ConfigError::NonLoopback(self.listen));
        }
        if self.refresh_interval.is_zero() {
            return Err(ConfigError::ZeroInterval);
        }
        Ok(())
    }
}
