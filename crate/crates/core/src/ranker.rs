//! Policy-driven adjustment and re-ranking of upstream search results.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::canonicalize_url;
use crate::exec::Execution;
use crate::label::{ItemId, LabelName};
use crate::trust::TrustModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Favored,
    Disfavored,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown stance {0:?} (expected \"favored\" or \"disfavored\")")]
pub struct UnknownStance(pub String);

impl FromStr for Stance {
    type Err = UnknownStance;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "favored" => Ok(Stance::Favored),
            "disfavored" => Ok(Stance::Disfavored),
            other => Err(UnknownStance(other.to_owned())),
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stance::Favored => "favored",
            Stance::Disfavored => "disfavored",
        })
    }
}

/// Which labels to promote and which to suppress, iterated in label order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Policy {
    entries: BTreeMap<LabelName, Stance>,
}

impl Policy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, label: LabelName, stance: Stance) -> Option<Stance> {
        self.entries.insert(label, stance)
    }

    pub fn remove(&mut self, label: &LabelName) -> Option<Stance> {
        self.entries.remove(label)
    }

    pub fn get(&self, label: &LabelName) -> Option<Stance> {
        self.entries.get(label).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LabelName, Stance)> {
        self.entries.iter().map(|(k, s)| (k, *s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(LabelName, Stance)> for Policy {
    fn from_iter<I: IntoIterator<Item = (LabelName, Stance)>>(iter: I) -> Self {
        Self { entries: iter.into_iter().collect() }
    }
}

/// Signed expectation from the user's point of view: positive is good.
pub fn favorability(expectation: f64, stance: Stance) -> f64 {
    match stance {
        Stance::Favored => expectation,
        Stance::Disfavored => -expectation,
    }
}

/// Multiplier contributed by one label with favorability `q` in `[-1, 1]`.
/// Lies in `[0.5, 2]`, and `label_factor(q) * label_factor(-q) == 1` for
/// `q >= 0`, so opposite assessments of equal magnitude cancel.
pub fn label_factor(q: f64) -> f64 {
    if q >= 0.0 {
        1.0 + q
    } else {
        1.0 + q / (1.0 - q)
    }
}

/// Factor by which to scale the upstream relevance score of `item`.
pub fn adjustment_factor(item: &ItemId, policy: &Policy, model: &TrustModel) -> f64 {
    let mut r = 1.0;
    for (label, stance) in policy.iter() {
        let q = favorability(model.final_expectation(item, label), stance);
        r *= label_factor(q);
    }
    r
}

/// One hit from the upstream engine, in upstream order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpstreamResult {
    pub url: String,
    pub title: String,
    pub snippet: String,
    /// Upstream relevance; absent, non-finite or non-positive scores are
    /// treated as missing.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredResult {
    /// URL as the upstream engine reported it.
    pub url: String,
    /// Canonical form, when the URL could be canonicalized.
    pub item: Option<ItemId>,
    pub title: String,
    pub snippet: String,
    pub upstream_score: f64,
    pub adjustment_factor: f64,
    pub adjusted_score: f64,
}

fn usable(score: Option<f64>) -> Option<f64> {
    score.filter(|s| s.is_finite() && *s > 0.0)
}

/// Upstream scores with gaps filled: a result lacking a usable score takes
/// the score of the nearest scored result above it, or 1 if there is none.
pub fn effective_scores(results: &[UpstreamResult]) -> Vec<f64> {
    let mut last = 1.0;
    results
        .iter()
        .map(|r| {
            if let Some(s) = usable(r.score) {
                last = s;
            }
            last
        })
        .collect()
}

pub fn rerank(results: Vec<UpstreamResult>, policy: &Policy, model: &TrustModel) -> Vec<ScoredResult> {
    rerank_with(results, policy, model, Execution::default())
}

/// Scores every result and sorts by adjusted score, highest first. Equal
/// adjusted scores keep their upstream order.
pub fn rerank_with(
    results: Vec<UpstreamResult>,
    policy: &Policy,
    model: &TrustModel,
    exec: Execution,
) -> Vec<ScoredResult> {
    let scores = effective_scores(&results);
    let items: Vec<Option<ItemId>> = results.iter().map(|r| canonicalize_url(&r.url).ok()).collect();
    let factors = exec.map_indices(items.len(), |n| match &items[n] {
        Some(item) => adjustment_factor(item, policy, model),
        None => 1.0,
    });

    let mut scored: Vec<ScoredResult> = results
        .into_iter()
        .zip(items)
        .zip(scores.into_iter().zip(factors))
        .map(|((r, item), (score, factor))| ScoredResult {
            url: r.url,
            item,
            title: r.title,
            snippet: r.snippet,
            upstream_score: score,
            adjustment_factor: factor,
            adjusted_score: score * factor,
        })
        .collect();
    scored.sort_by(|a, b| b.adjusted_score.total_cmp(&a.adjusted_score));
    scored
}

/// Final expectations of the policy's labels for `item`.
pub fn policy_expectations(item: &ItemId, policy: &Policy, model: &TrustModel) -> BTreeMap<LabelName, f64> {
    policy
        .iter()
        .map(|(label, _)| (label.clone(), model.final_expectation(item, label)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{LabelValue, SourceId, Tier};
    use crate::trust::AssertionSet;

    fn lbl(s: &str) -> LabelName {
        LabelName::new(s).unwrap()
    }

    fn hit(url: &str, score: Option<f64>) -> UpstreamResult {
        UpstreamResult { url: url.into(), title: url.into(), snippet: String::new(), score }
    }

    /// User labels `url` with `label = value` directly.
    fn model_with(labels: &[(&str, &str, LabelValue)]) -> TrustModel {
        let user = SourceId::new("user").unwrap();
        let mut data = AssertionSet::new();
        data.add_source(user.clone(), Tier(0));
        for (url, label, v) in labels {
            data.assert(&user, ItemId::parse(url).unwrap(), lbl(label), *v).unwrap();
        }
        TrustModel::build(&data)
    }

    #[test]
    fn empty_policy_is_neutral() {
        let model = model_with(&[("https://a.example/", "k", LabelValue::Applies)]);
        let item = ItemId::parse("https://a.example/").unwrap();
        assert_eq!(adjustment_factor(&item, &Policy::new(), &model), 1.0);
    }

    #[test]
    fn certain_labels_double_or_halve() {
        let model = model_with(&[("https://a.example/", "k", LabelValue::Applies)]);
        let item = ItemId::parse("https://a.example/").unwrap();
        let fav: Policy = [(lbl("k"), Stance::Favored)].into_iter().collect();
        let dis: Policy = [(lbl("k"), Stance::Disfavored)].into_iter().collect();
        assert_eq!(adjustment_factor(&item, &fav, &model), 2.0);
        assert_eq!(adjustment_factor(&item, &dis, &model), 0.5);
    }

    #[test]
    fn half_favorable_and_half_unfavorable_cancel() {
        // (1 + 0.5) * (1 - 0.5 / 1.5) = 1.5 * 2/3 = 1
        let r = label_factor(0.5) * label_factor(-0.5);
        assert!((r - 1.0).abs() < 1e-15, "{r}");
    }

    #[test]
    fn factor_bounds() {
        for n in 0..=200 {
            let q = -1.0 + n as f64 / 100.0;
            let f = label_factor(q);
            assert!((0.5..=2.0).contains(&f), "q={q} f={f}");
        }
    }

    #[test]
    fn disfavored_label_demotes_below_unlabeled() {
        let model = model_with(&[("https://a.example/", "hascookiebanner", LabelValue::Applies)]);
        let policy: Policy = [(lbl("hascookiebanner"), Stance::Disfavored)].into_iter().collect();
        let out = rerank(
            vec![hit("https://a.example/", Some(10.0)), hit("https://b.example/", Some(6.0))],
            &policy,
            &model,
        );
        assert_eq!(out[0].url, "https://b.example/");
        assert_eq!(out[0].adjusted_score, 6.0);
        assert_eq!(out[1].adjusted_score, 5.0);
        assert_eq!(out[1].adjustment_factor, 0.5);
    }

    #[test]
    fn empty_policy_keeps_upstream_order_even_with_ties() {
        let model = model_with(&[]);
        let input = vec![
            hit("https://a.example/", Some(1.0)),
            hit("https://b.example/", Some(3.0)),
            hit("https://c.example/", Some(3.0)),
            hit("https://d.example/", None),
        ];
        let out = rerank(input, &Policy::new(), &model);
        let urls: Vec<&str> = out.iter().map(|r| r.url.as_str()).collect();
        // b, c, d all score 3 and keep their upstream order; a (1) drops.
        assert_eq!(urls, ["https://b.example/", "https://c.example/", "https://d.example/", "https://a.example/"]);
    }

    #[test]
    fn missing_scores_inherit_from_above() {
        let input = vec![
            hit("https://a.example/", None),
            hit("https://b.example/", Some(4.0)),
            hit("https://c.example/", Some(-2.0)),
            hit("https://d.example/", Some(f64::NAN)),
            hit("https://e.example/", Some(2.5)),
            hit("https://f.example/", None),
        ];
        assert_eq!(effective_scores(&input), vec![1.0, 4.0, 4.0, 4.0, 2.5, 2.5]);
    }

    #[test]
    fn unparseable_urls_are_kept_with_neutral_factor() {
        let model = model_with(&[]);
        let policy: Policy = [(lbl("k"), Stance::Favored)].into_iter().collect();
        let out = rerank(vec![hit("not a url", Some(2.0))], &policy, &model);
        assert_eq!(out[0].item, None);
        assert_eq!(out[0].adjustment_factor, 1.0);
    }

    #[test]
    fn stance_vocabulary_is_closed() {
        assert_eq!("favored".parse(), Ok(Stance::Favored));
        assert_eq!("disfavored".parse(), Ok(Stance::Disfavored));
        assert!("blocked".parse::<Stance>().is_err());
        assert!(serde_json::from_str::<Policy>(r#"{"k":"blocked"}"#).is_err());
        let p: Policy = serde_json::from_str(r#"{"hascookiebanner":"disfavored"}"#).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"hascookiebanner":"disfavored"}"#);
    }
}
