//! Core of PURESearch: label records and their file format, the tiered
//! reputation/expectation engine, and policy-driven re-ranking of search
//! results.
//!
//! Everything here is pure computation over immutable values. The
//! `parallel` feature (on by default) evaluates independent work items of
//! the trust model and the ranker on the rayon pool; results are
//! bit-identical to the sequential path because every value is computed
//! with the same fixed summation order either way.

pub mod canonical;
pub mod exec;
pub mod label;
pub mod labelfile;
pub mod ranker;
pub mod trust;

pub use canonical::{canonicalize_url, UrlError};
pub use exec::Execution;
pub use label::{ItemId, LabelError, LabelName, LabelRecord, LabelValue, SourceId, Tier};
pub use labelfile::{parse_label_file, serialize_label_file, LineWarning, ParsedLabelFile, WarningReason};
pub use ranker::{adjustment_factor, rerank, rerank_with, Policy, ScoredResult, Stance, UpstreamResult};
pub use trust::{expectation, reputation, AssertionSet, TrustError, TrustModel};
