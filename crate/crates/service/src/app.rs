//! Service state: immutable snapshots plus a single serialized writer.
//!
//! Readers clone the current `Arc<Snapshot>` and work from it for the whole
//! request, so one response never mixes two states. Mutations (user
//! assertions, policy edits, applied refreshes) take the writer lock,
//! persist, and publish a fresh snapshot whose trust model is rebuilt
//! lazily on first use.

use std::collections::BTreeMap;
use std::io;
use std::sync::{Arc, OnceLock, RwLock};
use std::time::SystemTime;

use puresearch_core::ranker::policy_expectations;
use puresearch_core::{
    rerank, AssertionSet, ItemId, LabelName, LabelRecord, LabelValue, Policy, SourceId, Tier, TrustModel,
};
use serde::Serialize;
use tokio::sync::Mutex;

use crate::gateway::{validate_limit, validate_query, GatewayError, Upstream};
use crate::sources::{
    consolidate, fetch_source, write_atomic, DataDir, LabelStore, LoadedRegistry, RefreshReport, Registry,
    SourceKind,
};
use crate::transport::{FetchLimits, Transport};

pub struct Snapshot {
    pub registry: Arc<Registry>,
    pub store: Arc<LabelStore>,
    pub policy: Arc<Policy>,
    assertions: OnceLock<Arc<AssertionSet>>,
    model: OnceLock<Arc<TrustModel>>,
}

impl Snapshot {
    fn new(registry: Arc<Registry>, store: Arc<LabelStore>, policy: Arc<Policy>) -> Self {
        Self { registry, store, policy, assertions: OnceLock::new(), model: OnceLock::new() }
    }

    pub fn assertions(&self) -> Arc<AssertionSet> {
        self.assertions
            .get_or_init(|| Arc::new(consolidate(&self.registry, &self.store)))
            .clone()
    }

    pub fn model(&self) -> Arc<TrustModel> {
        self.model
            .get_or_init(|| Arc::new(TrustModel::build(&self.assertions())))
            .clone()
    }

    pub fn sources(&self) -> Vec<SourceView> {
        let model = self.model();
        self.registry
            .iter()
            .map(|s| {
                let cached = self.store.get(&s.id);
                SourceView {
                    id: s.id.clone(),
                    tier: s.tier,
                    kind: if s.is_user() { "user" } else { "remote" },
                    url: match &s.kind {
                        SourceKind::Remote(u) => Some(u.to_string()),
                        SourceKind::User => None,
                    },
                    reputation: model.reputation(&s.id).unwrap_or(0.0),
                    records: cached.map_or(0, |c| c.records.len()),
                    fetched_at: cached.and_then(|c| c.fetched_at).map(rfc3339),
                    last_error: cached.and_then(|c| c.last_error.clone()),
                }
            })
            .collect()
    }

    pub fn labels(&self, item: &ItemId) -> LabelView {
        let data = self.assertions();
        let model = self.model();
        let assertions = data
            .sources()
            .flat_map(|(source, tier)| {
                data.assertions_by(source)
                    .filter(move |(i, _, _)| *i == item)
                    .map(move |(_, label, value)| AssertionView {
                        source: source.clone(),
                        tier,
                        label: label.clone(),
                        value,
                    })
            })
            .collect();
        let expectations = model.labels_for(item).map(|(k, e)| (k.clone(), e)).collect();
        LabelView { url: item.clone(), assertions, expectations }
    }
}

fn rfc3339(t: SystemTime) -> String {
    humantime::format_rfc3339_seconds(t).to_string()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct SourceView {
    pub id: SourceId,
    pub tier: Tier,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    pub reputation: f64,
    pub records: usize,
    pub fetched_at: Option<String>,
    pub last_error: Option<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AssertionView {
    pub source: SourceId,
    pub tier: Tier,
    pub label: LabelName,
    pub value: LabelValue,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LabelView {
    pub url: ItemId,
    pub assertions: Vec<AssertionView>,
    /// Final expectation for every label anyone asserted for this URL.
    pub expectations: BTreeMap<LabelName, f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResultView {
    pub url: String,
    pub title: String,
    pub snippet: String,
    pub score: f64,
    pub ascore: f64,
    /// Expectations of the policy's labels only.
    pub labels: BTreeMap<LabelName, f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SourceSummary {
    pub id: SourceId,
    pub tier: Tier,
    pub reputation: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SearchView {
    pub results: Vec<ResultView>,
    pub policy: Policy,
    pub sources: Vec<SourceSummary>,
}

pub struct App {
    snapshot: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
    data: DataDir,
    upstream: Arc<dyn Upstream>,
    transport: Arc<dyn Transport>,
    limits: FetchLimits,
}

/// Reads the persisted policy; a missing file is an empty policy.
pub fn load_policy(data: &DataDir) -> Result<Policy, String> {
    let path = data.policy();
    match std::fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| format!("{}: {e}", path.display())),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Policy::new()),
        Err(e) => Err(format!("{}: {e}", path.display())),
    }
}

impl App {
    pub fn new(
        loaded: LoadedRegistry,
        policy: Policy,
        data: DataDir,
        upstream: Arc<dyn Upstream>,
        transport: Arc<dyn Transport>,
        limits: FetchLimits,
    ) -> Self {
        let snapshot = Snapshot::new(Arc::new(loaded.registry), Arc::new(loaded.store), Arc::new(policy));
        Self {
            snapshot: RwLock::new(Arc::new(snapshot)),
            writer: Mutex::new(()),
            data,
            upstream,
            transport,
            limits,
        }
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().unwrap().clone()
    }

    fn publish(&self, snapshot: Snapshot) {
        *self.snapshot.write().unwrap() = Arc::new(snapshot);
    }

    pub async fn search(&self, query: &str, limit: Option<usize>) -> Result<SearchView, GatewayError> {
        let query = validate_query(query)?;
        let limit = validate_limit(limit)?;
        let hits = self.upstream.search(query, limit).await?;

        let snap = self.snapshot();
        let model = snap.model();
        let results = rerank(hits, &snap.policy, &model)
            .into_iter()
            .map(|r| ResultView {
                labels: r
                    .item
                    .as_ref()
                    .map(|i| policy_expectations(i, &snap.policy, &model))
                    .unwrap_or_default(),
                url: r.url,
                title: r.title,
                snippet: r.snippet,
                score: r.upstream_score,
                ascore: r.adjusted_score,
            })
            .collect();
        let sources = snap
            .sources()
            .into_iter()
            .map(|s| SourceSummary { id: s.id, tier: s.tier, reputation: s.reputation })
            .collect();
        Ok(SearchView { results, policy: (*snap.policy).clone(), sources })
    }

    pub fn policy(&self) -> Policy {
        (*self.snapshot().policy).clone()
    }

    pub async fn set_policy(&self, policy: Policy) -> io::Result<Policy> {
        let _w = self.writer.lock().await;
        let bytes = serde_json::to_vec_pretty(&policy).map_err(io::Error::other)?;
        write_atomic(&self.data.policy(), &bytes)?;
        let snap = self.snapshot();
        self.publish(Snapshot::new(snap.registry.clone(), snap.store.clone(), Arc::new(policy.clone())));
        Ok(policy)
    }

    pub async fn add_user_assertion(&self, record: LabelRecord) -> io::Result<()> {
        let _w = self.writer.lock().await;
        let snap = self.snapshot();
        let mut store = (*snap.store).clone();
        store.record_user_assertion(snap.registry.user(), record, &self.data)?;
        self.publish(Snapshot::new(snap.registry.clone(), Arc::new(store), snap.policy.clone()));
        Ok(())
    }

    /// Polls every remote source. Fetches run outside the writer lock; only
    /// applying each result is serialized.
    pub async fn refresh_all(&self) -> Vec<(SourceId, RefreshReport)> {
        let registry = self.snapshot().registry.clone();
        let mut reports = Vec::new();
        for source in registry.remotes() {
            let outcome = fetch_source(self.transport.as_ref(), source, self.limits).await;
            let _w = self.writer.lock().await;
            let snap = self.snapshot();
            let mut store = (*snap.store).clone();
            let report = store.apply_refresh(source, outcome, &self.data);
            match &report {
                RefreshReport::Replaced { .. } => tracing::info!(source = %source.id, "{report}"),
                RefreshReport::StaleKept { .. } => tracing::warn!(source = %source.id, "{report}"),
            }
            self.publish(Snapshot::new(snap.registry.clone(), Arc::new(store), snap.policy.clone()));
            reports.push((source.id.clone(), report));
        }
        reports
    }
}
