use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use puresearch::config::ServiceConfig;
use puresearch::server;
use puresearch::transport::HttpTransport;
use tracing_subscriber::EnvFilter;

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let config = ServiceConfig::parse();
    match server::run(config, Arc::new(HttpTransport::new())).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("puresearch: {e}");
            ExitCode::FAILURE
        }
    }
}
