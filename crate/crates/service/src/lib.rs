//! PURESearch service: a loopback HTTP proxy in front of a metasearch
//! engine that re-ranks results using labels from the user and from tiered,
//! partially trusted label sources.
//!
//! - [`sources`]: source registry, label storage, polling
//! - [`gateway`]: upstream engine adapter and fixture-backed mock
//! - [`app`]: snapshot state and the operations behind the API
//! - [`api`]: HTTP routes
//! - [`transport`]: the only path for outbound requests

pub mod api;
pub mod app;
pub mod config;
pub mod gateway;
pub mod server;
pub mod sources;
pub mod transport;
