mod common;

use common::{assertion_sets, item, label, ITEMS, LABELS};
use proptest::prelude::*;
use puresearch_core::trust::naive::{naive_expectation, naive_reputation};
use puresearch_core::trust::is_zero;
use puresearch_core::{Execution, Tier, TrustModel};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn memoized_tables_equal_the_naive_recursion(data in assertion_sets()) {
        let model = TrustModel::build(&data);
        for (j, _) in data.sources() {
            prop_assert_eq!(model.reputation(j), Some(naive_reputation(j, &data).unwrap()));
        }
        for i in 0..ITEMS {
            for k in 0..LABELS {
                for t in 0..=model.t_max().get() {
                    let fast = model.expectation(&item(i), &label(k), Tier(t));
                    let slow = naive_expectation(&item(i), &label(k), i64::from(t), &data);
                    prop_assert_eq!(fast.to_bits(), slow.to_bits(), "({}, {}, {})", i, k, t);
                }
            }
        }
    }

    #[test]
    fn values_stay_in_range(data in assertion_sets()) {
        let model = TrustModel::build(&data);
        for (_, tier, r) in model.reputations() {
            prop_assert!((0.0..=1.0).contains(&r));
            if tier.get() == 0 {
                prop_assert_eq!(r, 1.0);
            }
        }
        for (i, k) in model.pairs() {
            for t in 0..=model.t_max().get() {
                let e = model.expectation(i, k, Tier(t));
                prop_assert!((-1.0..=1.0).contains(&e));
            }
        }
    }

    #[test]
    fn nonzero_higher_tier_overrides(data in assertion_sets()) {
        let model = TrustModel::build(&data);
        let t_max = model.t_max().get();
        for (i, k) in model.pairs() {
            for hi in 0..=t_max {
                let e = model.expectation(i, k, Tier(hi));
                if is_zero(e) {
                    continue;
                }
                for lo in hi..=t_max + 1 {
                    prop_assert_eq!(model.expectation(i, k, Tier(lo)), e);
                }
            }
        }
    }

    #[test]
    fn zero_reputation_sources_do_not_matter(data in assertion_sets()) {
        let model = TrustModel::build(&data);
        let zeros: Vec<_> = model
            .reputations()
            .filter(|(_, _, r)| *r == 0.0)
            .map(|(s, _, _)| s.clone())
            .collect();
        for s in zeros {
            let mut pruned = data.clone();
            pruned.remove_source(&s);
            let smaller = TrustModel::build(&pruned);
            for i in 0..ITEMS {
                for k in 0..LABELS {
                    prop_assert_eq!(
                        model.final_expectation(&item(i), &label(k)).to_bits(),
                        smaller.expectation(&item(i), &label(k), model.t_max()).to_bits()
                    );
                }
            }
        }
    }

    #[test]
    fn builds_are_deterministic_across_execution_modes(data in assertion_sets()) {
        let a = TrustModel::build_with(&data, Execution::Sequential);
        let b = TrustModel::build_with(&data, Execution::Parallel);
        let c = TrustModel::build(&data);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&b, &c);
    }
}
