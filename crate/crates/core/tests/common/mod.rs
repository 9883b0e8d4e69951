#![allow(dead_code)]

use proptest::prelude::*;
use puresearch_core::{AssertionSet, ItemId, LabelName, LabelValue, SourceId, Tier};

pub const MAX_TIERS: u32 = 4;
pub const MAX_SOURCES: usize = 8;
pub const ITEMS: usize = 10;
pub const LABELS: usize = 5;

pub fn sid(n: usize) -> SourceId {
    SourceId::new(format!("src{n}")).unwrap()
}

pub fn item(n: usize) -> ItemId {
    ItemId::parse(&format!("https://site{n}.example/page")).unwrap()
}

pub fn label(n: usize) -> LabelName {
    LabelName::new(format!("label{n}")).unwrap()
}

/// Random assertion sets: up to 8 sources on tiers 0..4, each asserting
/// each of the 10x5 (item, label) pairs with probability 0.3.
pub fn assertion_sets() -> impl Strategy<Value = AssertionSet> {
    prop::collection::vec(0..MAX_TIERS, 1..=MAX_SOURCES)
        .prop_flat_map(|tiers| {
            let cells = tiers.len() * ITEMS * LABELS;
            (
                Just(tiers),
                prop::collection::vec(prop::option::weighted(0.3, any::<bool>()), cells),
            )
        })
        .prop_map(|(tiers, cells)| {
            let mut data = AssertionSet::new();
            for (s, t) in tiers.iter().enumerate() {
                data.add_source(sid(s), Tier(*t));
            }
            for (n, cell) in cells.into_iter().enumerate() {
                let Some(applies) = cell else { continue };
                let s = n / (ITEMS * LABELS);
                let i = (n / LABELS) % ITEMS;
                let k = n % LABELS;
                let v = if applies { LabelValue::Applies } else { LabelValue::DoesNotApply };
                data.assert(&sid(s), item(i), label(k), v).unwrap();
            }
            data
        })
}
