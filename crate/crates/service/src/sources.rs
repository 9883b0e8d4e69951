//! Label source registry, local label storage and remote polling.
//!
//! Sources are configured one per line as `tier TAB id TAB url`; `#` starts a
//! comment line. The url field `user` declares the local user source, which
//! must sit on tier 0 and is added automatically when absent.
//!
//! Storage reuses the label file format: `<data>/user.labels` for the user
//! and `<data>/sources/<id>.labels` for the last good copy of each remote.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use puresearch_core::{
    parse_label_file, serialize_label_file, AssertionSet, LabelRecord, LineWarning, SourceId, Tier,
};
use thiserror::Error;
use url::Url;

use crate::transport::{FetchLimits, Transport};

pub const USER_SOURCE: &str = "user";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceKind {
    Remote(Url),
    User,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceConfig {
    pub id: SourceId,
    pub kind: SourceKind,
    pub tier: Tier,
}

impl SourceConfig {
    pub fn is_user(&self) -> bool {
        self.kind == SourceKind::User
    }
}

/// Configured sources, exactly one of which is the user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    sources: Vec<SourceConfig>,
}

impl Registry {
    pub fn user(&self) -> &SourceConfig {
        self.sources.iter().find(|s| s.is_user()).expect("registry always has a user source")
    }

    pub fn get(&self, id: &SourceId) -> Option<&SourceConfig> {
        self.sources.iter().find(|s| &s.id == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SourceConfig> {
        self.sources.iter()
    }

    pub fn remotes(&self) -> impl Iterator<Item = &SourceConfig> {
        self.sources.iter().filter(|s| !s.is_user())
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}:{line}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub line: usize,
    pub message: String,
}

/// Parses a sources config. Returns the registry (user source injected if
/// absent) and non-fatal warnings.
pub fn parse_registry(text: &str, path: &str) -> Result<(Registry, Vec<String>), ConfigError> {
    let err = |line: usize, message: String| ConfigError { path: path.to_owned(), line, message };
    let mut sources: Vec<SourceConfig> = Vec::new();
    let mut warnings = Vec::new();

    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [tier, id, location] = fields[..] else {
            return Err(err(line_no, format!("expected `tier<TAB>id<TAB>url`, found {} field(s)", fields.len())));
        };
        let tier = tier
            .trim()
            .parse::<u32>()
            .map(Tier)
            .map_err(|_| err(line_no, format!("bad tier {tier:?}")))?;
        let id = SourceId::new(id.trim()).map_err(|e| err(line_no, e.to_string()))?;
        if sources.iter().any(|s| s.id == id) {
            return Err(err(line_no, format!("duplicate source id {id}")));
        }
        let kind = match location.trim() {
            "user" => {
                if sources.iter().any(SourceConfig::is_user) {
                    return Err(err(line_no, "more than one user source".into()));
                }
                if tier != Tier::TOP {
                    return Err(err(line_no, "the user source must be on tier 0".into()));
                }
                SourceKind::User
            }
            raw => {
                let url = Url::parse(raw).map_err(|e| err(line_no, format!("bad source URL {raw:?}: {e}")))?;
                if !matches!(url.scheme(), "http" | "https") {
                    return Err(err(line_no, format!("unsupported URL scheme {:?}", url.scheme())));
                }
                if tier == Tier::TOP {
                    warnings.push(format!(
                        "{path}:{line_no}: remote source {id} is on tier 0 and will be trusted like the user"
                    ));
                }
                SourceKind::Remote(url)
            }
        };
        sources.push(SourceConfig { id, kind, tier });
    }

    if !sources.iter().any(SourceConfig::is_user) {
        let id = SourceId::new(USER_SOURCE).expect("valid id");
        if sources.iter().any(|s| s.id == id) {
            return Err(err(0, format!("source id {USER_SOURCE:?} is reserved for the user")));
        }
        sources.insert(0, SourceConfig { id, kind: SourceKind::User, tier: Tier::TOP });
    }
    Ok((Registry { sources }, warnings))
}

/// Cached records and fetch metadata for one source.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceRecords {
    pub records: Vec<LabelRecord>,
    pub fetched_at: Option<SystemTime>,
    pub last_error: Option<String>,
    pub warnings: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelStore {
    per_source: BTreeMap<SourceId, SourceRecords>,
}

impl LabelStore {
    pub fn get(&self, id: &SourceId) -> Option<&SourceRecords> {
        self.per_source.get(id)
    }

    pub fn records(&self, id: &SourceId) -> &[LabelRecord] {
        self.per_source.get(id).map_or(&[], |s| s.records.as_slice())
    }

    pub fn insert(&mut self, id: SourceId, records: SourceRecords) {
        self.per_source.insert(id, records);
    }
}

/// Paths inside the data directory.
#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn user_labels(&self) -> PathBuf {
        self.root.join("user.labels")
    }

    pub fn source_labels(&self, id: &SourceId) -> PathBuf {
        self.root.join("sources").join(format!("{}.labels", file_stem(id.as_str())))
    }

    pub fn policy(&self) -> PathBuf {
        self.root.join("policy.json")
    }

    pub fn labels_path(&self, source: &SourceConfig) -> PathBuf {
        if source.is_user() {
            self.user_labels()
        } else {
            self.source_labels(&source.id)
        }
    }
}

/// Escapes a source id into a file name: anything outside `[A-Za-z0-9._-]`
/// (and a leading dot) becomes `%XX`.
fn file_stem(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for (n, b) in id.bytes().enumerate() {
        let plain = b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || (b == b'.' && n > 0);
        if plain {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

/// Writes `bytes` to `path` so that readers (and a crash) see either the
/// old or the new contents.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("file");
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    if let Ok(d) = std::fs::File::open(dir) {
        let _ = d.sync_all();
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct LoadedRegistry {
    pub registry: Registry,
    pub store: LabelStore,
    pub warnings: Vec<String>,
}

/// Reads the sources config (a missing `config` means "user only") and
/// hydrates cached labels from the data directory.
pub fn load_registry(config: Option<&Path>, data: &DataDir) -> Result<LoadedRegistry, LoadError> {
    let (registry, mut warnings) = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
                path: path.display().to_string(),
                source,
            })?;
            parse_registry(&text, &path.display().to_string())?
        }
        None => parse_registry("", "<none>")?,
    };

    let mut store = LabelStore::default();
    for source in registry.iter() {
        let path = data.labels_path(source);
        let mut entry = SourceRecords::default();
        match std::fs::read(&path) {
            Ok(bytes) => {
                let parsed = parse_label_file(&bytes);
                for w in &parsed.warnings {
                    warnings.push(format!("{}: {w}", path.display()));
                }
                entry.records = parsed.records;
                entry.warnings = parsed.warnings.len();
                if !source.is_user() {
                    entry.fetched_at = std::fs::metadata(&path).and_then(|m| m.modified()).ok();
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(source) => {
                return Err(LoadError::Io { path: path.display().to_string(), source });
            }
        }
        store.insert(source.id.clone(), entry);
    }
    Ok(LoadedRegistry { registry, store, warnings })
}

/// Result of one poll of a remote source, before it is applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefreshOutcome {
    Updated {
        records: Vec<LabelRecord>,
        warnings: Vec<LineWarning>,
        fetched_at: SystemTime,
    },
    Stale {
        error: String,
    },
}

/// Downloads and parses a remote source's current label file.
pub async fn fetch_source(transport: &dyn Transport, source: &SourceConfig, limits: FetchLimits) -> RefreshOutcome {
    let SourceKind::Remote(url) = &source.kind else {
        return RefreshOutcome::Stale { error: "the user source is not fetched".into() };
    };
    match transport.get(url, limits).await {
        Ok(f) if f.is_success() => {
            let parsed = parse_label_file(&f.body);
            for w in &parsed.warnings {
                tracing::warn!(source = %source.id, "skipped {w}");
            }
            RefreshOutcome::Updated {
                records: parsed.records,
                warnings: parsed.warnings,
                fetched_at: SystemTime::now(),
            }
        }
        Ok(f) => RefreshOutcome::Stale { error: format!("HTTP status {}", f.status) },
        Err(e) => RefreshOutcome::Stale { error: e.to_string() },
    }
}

/// What applying a refresh did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefreshReport {
    Replaced { records: usize, warnings: usize },
    StaleKept { error: String },
}

impl fmt::Display for RefreshReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefreshReport::Replaced { records, warnings } => {
                write!(f, "replaced with {records} record(s), {warnings} warning(s)")
            }
            RefreshReport::StaleKept { error } => write!(f, "stale, cached copy retained: {error}"),
        }
    }
}

impl LabelStore {
    /// Applies a poll result. A successful fetch replaces the source's
    /// records wholesale (after persisting them); anything else keeps the
    /// cached records and sets `last_error`.
    pub fn apply_refresh(&mut self, source: &SourceConfig, outcome: RefreshOutcome, data: &DataDir) -> RefreshReport {
        let entry = self.per_source.entry(source.id.clone()).or_default();
        let error = match outcome {
            RefreshOutcome::Updated { records, warnings, fetched_at } => {
                match write_atomic(&data.labels_path(source), &serialize_label_file(&records)) {
                    Ok(()) => {
                        let report = RefreshReport::Replaced { records: records.len(), warnings: warnings.len() };
                        *entry = SourceRecords {
                            records,
                            fetched_at: Some(fetched_at),
                            last_error: None,
                            warnings: warnings.len(),
                        };
                        return report;
                    }
                    Err(e) => format!("could not persist fetched labels: {e}"),
                }
            }
            RefreshOutcome::Stale { error } => error,
        };
        entry.last_error = Some(error.clone());
        RefreshReport::StaleKept { error }
    }

    /// Upserts a user assertion and persists the user file before updating
    /// memory; on a write failure nothing changes.
    pub fn record_user_assertion(&mut self, user: &SourceConfig, record: LabelRecord, data: &DataDir) -> io::Result<()> {
        let mut records = self.records(&user.id).to_vec();
        match records
            .iter_mut()
            .find(|r| r.item == record.item && r.label == record.label)
        {
            Some(existing) => existing.value = record.value,
            None => records.push(record),
        }
        write_atomic(&data.user_labels(), &serialize_label_file(&records))?;
        self.per_source.entry(user.id.clone()).or_default().records = records;
        Ok(())
    }
}

/// Joins registry and store into one assertion set. Within a source, the
/// last record for an (item, label) wins.
pub fn consolidate(registry: &Registry, store: &LabelStore) -> AssertionSet {
    let mut data = AssertionSet::new();
    for source in registry.iter() {
        data.add_source(source.id.clone(), source.tier);
        for rec in store.records(&source.id) {
            data.assert(&source.id, rec.item.clone(), rec.label.clone(), rec.value)
                .expect("source registered above");
        }
    }
    data
}

#[cfg(test)]
#[path = "sources_tests.rs"]
mod tests;
