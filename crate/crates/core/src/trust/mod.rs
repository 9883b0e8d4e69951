//! Tiered trust aggregation.
//!
//! A source's reputation measures how often it agrees with the consensus of
//! the tiers above it; the expectation of a label for an item is the
//! reputation-weighted mean of the values asserted at the highest tier that
//! has a non-zero opinion. Tier 0 is ground truth with reputation 1.
//!
//! [`TrustModel::build`] evaluates both functions bottom-up, one tier at a
//! time: reputations of tier-`t` sources read only expectations at tier
//! `t - 1`, and expectations at tier `t` read only reputations of tier-`t`
//! sources plus expectations at `t - 1`. [`naive`] holds the literal
//! mutually recursive definitions, used to check the tables.

pub mod naive;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exec::Execution;
use crate::label::{ItemId, LabelName, LabelValue, SourceId, Tier};

/// Expectations with magnitude below this are treated as zero by the
/// override and consensus-sign tests.
pub const ZERO_EPSILON: f64 = 1e-12;

#[inline]
pub fn is_zero(e: f64) -> bool {
    e.abs() < ZERO_EPSILON
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrustError {
    #[error("unknown source {0}")]
    UnknownSource(SourceId),
}

/// Every (source, item, label) assertion together with the source tiers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssertionSet {
    tiers: BTreeMap<SourceId, Tier>,
    by_source: BTreeMap<SourceId, BTreeMap<ItemId, BTreeMap<LabelName, LabelValue>>>,
}

impl AssertionSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `source` at `tier`, replacing any previous tier.
    pub fn add_source(&mut self, source: SourceId, tier: Tier) -> Option<Tier> {
        self.tiers.insert(source, tier)
    }

    /// Records `source`'s value for `(item, label)`, returning the value it
    /// replaced.
    pub fn assert(
        &mut self,
        source: &SourceId,
        item: ItemId,
        label: LabelName,
        value: LabelValue,
    ) -> Result<Option<LabelValue>, TrustError> {
        if !self.tiers.contains_key(source) {
            return Err(TrustError::UnknownSource(source.clone()));
        }
        Ok(self
            .by_source
            .entry(source.clone())
            .or_default()
            .entry(item)
            .or_default()
            .insert(label, value))
    }

    /// Removes a source and everything it asserted.
    pub fn remove_source(&mut self, source: &SourceId) -> Option<Tier> {
        self.by_source.remove(source);
        self.tiers.remove(source)
    }

    pub fn tier(&self, source: &SourceId) -> Option<Tier> {
        self.tiers.get(source).copied()
    }

    /// Sources in ascending id order.
    pub fn sources(&self) -> impl Iterator<Item = (&SourceId, Tier)> {
        self.tiers.iter().map(|(s, t)| (s, *t))
    }

    /// One source's assertions in ascending (item, label) order.
    pub fn assertions_by<'a>(
        &'a self,
        source: &SourceId,
    ) -> impl Iterator<Item = (&'a ItemId, &'a LabelName, LabelValue)> + 'a {
        self.by_source
            .get(source)
            .into_iter()
            .flat_map(|m| m.iter())
            .flat_map(|(i, labels)| labels.iter().map(move |(k, v)| (i, k, *v)))
    }

    pub fn value(&self, source: &SourceId, item: &ItemId, label: &LabelName) -> Option<LabelValue> {
        self.by_source
            .get(source)?
            .get(item)?
            .get(label)
            .copied()
    }

    /// All assertions ordered by source, then item, then label.
    pub fn iter(&self) -> impl Iterator<Item = (&SourceId, &ItemId, &LabelName, LabelValue)> {
        self.by_source
            .iter()
            .flat_map(|(s, m)| m.iter().map(move |(i, labels)| (s, i, labels)))
            .flat_map(|(s, i, labels)| labels.iter().map(move |(k, v)| (s, i, k, *v)))
    }

    pub fn len(&self) -> usize {
        self.by_source
            .values()
            .flat_map(BTreeMap::values)
            .map(BTreeMap::len)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The largest tier number of any registered source, 0 when empty.
    pub fn t_max(&self) -> Tier {
        self.tiers.values().copied().max().unwrap_or(Tier::TOP)
    }
}

/// Fully materialized reputations and expectations for one [`AssertionSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrustModel {
    sources: Vec<SourceId>,
    tiers: Vec<Tier>,
    reputations: Vec<f64>,
    pairs: Vec<(ItemId, LabelName)>,
    /// `expectations[t][p]` for tiers `0..=t_max`.
    expectations: Vec<Vec<f64>>,
    t_max: Tier,
}

impl TrustModel {
    pub fn build(data: &AssertionSet) -> Self {
        Self::build_with(data, Execution::default())
    }

    pub fn build_with(data: &AssertionSet, exec: Execution) -> Self {
        let sources: Vec<SourceId> = data.tiers.keys().cloned().collect();
        let tiers: Vec<Tier> = data.tiers.values().copied().collect();
        let t_max = data.t_max();

        let mut pair_index: BTreeMap<(&ItemId, &LabelName), usize> = BTreeMap::new();
        for (_, i, k, _) in data.iter() {
            pair_index.insert((i, k), 0);
        }
        for (n, slot) in pair_index.values_mut().enumerate() {
            *slot = n;
        }
        let pairs: Vec<(ItemId, LabelName)> =
            pair_index.keys().map(|(i, k)| ((*i).clone(), (*k).clone())).collect();

        // Both lists come out sorted: sources ascend, and each source's
        // assertions ascend by (item, label), which is pair-index order.
        let mut asserters: Vec<Vec<(usize, f64)>> = vec![Vec::new(); pairs.len()];
        let mut own: Vec<Vec<(usize, f64)>> = vec![Vec::new(); sources.len()];
        for (s, source) in sources.iter().enumerate() {
            for (i, k, v) in data.assertions_by(source) {
                let p = pair_index[&(i, k)];
                asserters[p].push((s, v.as_f64()));
                own[s].push((p, v.as_f64()));
            }
        }

        let levels = t_max.get() as usize + 1;
        let mut by_tier: Vec<Vec<usize>> = vec![Vec::new(); levels];
        for (s, t) in tiers.iter().enumerate() {
            by_tier[t.get() as usize].push(s);
        }

        let mut reputations = vec![0.0; sources.len()];
        let mut expectations: Vec<Vec<f64>> = Vec::with_capacity(levels);

        for (t, members) in by_tier.iter().enumerate() {
            debug_assert_eq!(expectations.len(), t, "tier {t} evaluated out of order");
            let above = t.checked_sub(1).map(|u| expectations[u].as_slice());

            let reps = exec.map_indices(members.len(), |m| match above {
                None => 1.0,
                Some(above) => agreement(&own[members[m]], above),
            });
            for (&s, r) in members.iter().zip(reps) {
                reputations[s] = r;
            }

            let reputations = &reputations;
            let level = exec.map_indices(pairs.len(), |p| {
                let prev = above.map_or(0.0, |above| above[p]);
                if !is_zero(prev) {
                    return prev;
                }
                let (mut n, mut d) = (0.0, 0.0);
                for &(s, v) in &asserters[p] {
                    if tiers[s].get() as usize == t {
                        let r = reputations[s];
                        n += r * v;
                        d += r;
                    }
                }
                if d == 0.0 {
                    0.0
                } else {
                    n / d
                }
            });
            expectations.push(level);
        }

        Self { sources, tiers, reputations, pairs, expectations, t_max }
    }

    pub fn t_max(&self) -> Tier {
        self.t_max
    }

    pub fn reputation(&self, source: &SourceId) -> Option<f64> {
        let s = self.sources.binary_search(source).ok()?;
        Some(self.reputations[s])
    }

    /// `(source, tier, reputation)` in ascending source order.
    pub fn reputations(&self) -> impl Iterator<Item = (&SourceId, Tier, f64)> {
        self.sources
            .iter()
            .zip(&self.tiers)
            .zip(&self.reputations)
            .map(|((s, t), r)| (s, *t, *r))
    }

    fn pair(&self, item: &ItemId, label: &LabelName) -> Option<usize> {
        self.pairs
            .binary_search_by(|(i, k)| (i, k).cmp(&(item, label)))
            .ok()
    }

    /// Expectation based on tiers `0..=tier`. Tiers beyond `t_max` have no
    /// sources and so repeat the `t_max` value.
    pub fn expectation(&self, item: &ItemId, label: &LabelName, tier: Tier) -> f64 {
        let Some(p) = self.pair(item, label) else {
            return 0.0;
        };
        let e = self.expectations[tier.min(self.t_max).get() as usize][p];
        // Past the last populated tier a sub-epsilon residue falls through
        // to an empty tier and becomes 0.
        if tier > self.t_max && is_zero(e) {
            0.0
        } else {
            e
        }
    }

    /// Expectation over all tiers, the value used for ranking.
    pub fn final_expectation(&self, item: &ItemId, label: &LabelName) -> f64 {
        self.expectation(item, label, self.t_max)
    }

    /// Labels asserted for `item` by anyone, with their final expectations.
    pub fn labels_for<'a>(&'a self, item: &ItemId) -> impl Iterator<Item = (&'a LabelName, f64)> + 'a {
        let start = self.pairs.partition_point(|(i, _)| i < item);
        let end = self.pairs.partition_point(|(i, _)| i <= item);
        let last = self.t_max.get() as usize;
        (start..end).map(move |p| (&self.pairs[p].1, self.expectations[last][p]))
    }

    /// Every `(item, label)` pair that appears in the data.
    pub fn pairs(&self) -> &[(ItemId, LabelName)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }
}

/// Reputation of a non-top-tier source from its assertions and the
/// expectations of the tier directly above it.
fn agreement(own: &[(usize, f64)], above: &[f64]) -> f64 {
    let (mut n, mut d) = (0.0, 0.0);
    for &(p, v) in own {
        let e = above[p];
        if is_zero(e) {
            continue;
        }
        let x = if e > 0.0 { 1.0 } else { -1.0 };
        n += f64::abs(v - x);
        d += 1.0;
    }
    if d == 0.0 {
        0.0
    } else {
        f64::max(1.0 - n / d, 0.0)
    }
}

/// Reputation of `source` within `data`, in `[0, 1]`.
pub fn reputation(source: &SourceId, data: &AssertionSet) -> Result<f64, TrustError> {
    if data.tier(source).is_none() {
        return Err(TrustError::UnknownSource(source.clone()));
    }
    Ok(TrustModel::build(data)
        .reputation(source)
        .expect("registered source has a reputation"))
}

/// Expectation of `label` for `item` from tiers `0..=tier`; any negative
/// tier gives 0.
pub fn expectation(item: &ItemId, label: &LabelName, tier: i64, data: &AssertionSet) -> f64 {
    if tier < 0 {
        return 0.0;
    }
    let tier = Tier(u32::try_from(tier).unwrap_or(u32::MAX));
    TrustModel::build(data).expectation(item, label, tier)
}
