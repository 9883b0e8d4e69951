use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use puresearch_core::{
    rerank_with, AssertionSet, Execution, ItemId, LabelName, LabelValue, Policy, SourceId, Stance, Tier,
    TrustModel, UpstreamResult,
};

fn item(n: usize) -> ItemId {
    ItemId::parse(&format!("https://site{}.example/p/{n}", n % 97)).unwrap()
}

fn label(n: usize) -> LabelName {
    LabelName::new(format!("label{n}")).unwrap()
}

/// `sources` sources over 4 tiers with the user alone on tier 0; every
/// source labels `density` of the item x label grid.
fn workload(sources: usize, items: usize, labels: usize, density: f64) -> AssertionSet {
    let mut rng = StdRng::seed_from_u64(7);
    let mut data = AssertionSet::new();
    for s in 0..sources {
        let tier = if s == 0 { 0 } else { 1 + (s % 3) as u32 };
        data.add_source(SourceId::new(format!("s{s:03}")).unwrap(), Tier(tier));
    }
    for s in 0..sources {
        let id = SourceId::new(format!("s{s:03}")).unwrap();
        for i in 0..items {
            for k in 0..labels {
                if rng.random_bool(density) {
                    let v = if rng.random_bool(0.6) { LabelValue::Applies } else { LabelValue::DoesNotApply };
                    data.assert(&id, item(i), label(k), v).unwrap();
                }
            }
        }
    }
    data
}

fn modes() -> &'static [(&'static str, Execution)] {
    &[("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn bench_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("trust_model_build");
    for &(sources, items) in &[(16, 500), (64, 2000)] {
        let data = workload(sources, items, 8, 0.1);
        for &(name, exec) in modes() {
            group.bench_with_input(BenchmarkId::new(name, format!("{sources}x{items}")), &data, |b, data| {
                b.iter(|| TrustModel::build_with(black_box(data), exec))
            });
        }
    }
    group.finish();
}

fn bench_rerank(c: &mut Criterion) {
    let data = workload(32, 2000, 8, 0.1);
    let model = TrustModel::build(&data);
    let policy: Policy = (0..8)
        .map(|k| (label(k), if k % 2 == 0 { Stance::Favored } else { Stance::Disfavored }))
        .collect();
    let results: Vec<UpstreamResult> = (0..1000)
        .map(|n| UpstreamResult {
            url: item(n * 2).to_string(),
            title: format!("result {n}"),
            snippet: String::new(),
            score: Some(1000.0 - n as f64),
        })
        .collect();

    let mut group = c.benchmark_group("rerank_1000");
    for &(name, exec) in modes() {
        group.bench_function(name, |b| {
            b.iter(|| rerank_with(black_box(results.clone()), &policy, &model, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_build, bench_rerank);
criterion_main!(benches);
