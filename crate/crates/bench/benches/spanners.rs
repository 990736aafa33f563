use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ftspan::alg1::{build_alg1_spanner, recommended_p, Alg1Params};
use ftspan::base::{acim_2additive, bkmp_6additive};
use ftspan::ft_blocks::{FactoryKind, SourcewiseFactory};
use ftspan::generate::{generate, GeneratorSpec};
use ftspan::graph::{all_pairs_distances, FaultKind, FaultSet, Graph};
use ftspan::oracle::{verify_claim, VerifyMode};

fn gnp(n: usize, prob: f64) -> Graph {
    generate(&GeneratorSpec::Gnp { n, prob, connected: true }, 1).unwrap().graph
}

fn bfs(c: &mut Criterion) {
    let mut group = c.benchmark_group("apsp");
    for n in [64, 128, 256] {
        let g = gnp(n, 0.1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| all_pairs_distances(black_box(g), &FaultSet::empty()).unwrap())
        });
    }
    group.finish();
}

fn builders(c: &mut Criterion) {
    let g = gnp(128, 0.3);
    let mut group = c.benchmark_group("build");
    group.sample_size(10);
    group.bench_function("acim2", |b| b.iter(|| acim_2additive(black_box(&g)).unwrap()));
    group.bench_function("bkmp6", |b| b.iter(|| bkmp_6additive(black_box(&g)).unwrap()));
    for kind in [FactoryKind::Preserver, FactoryKind::Augmented2Additive] {
        let p = recommended_p(g.n(), kind, FaultKind::Edge);
        group.bench_function(format!("alg1-{kind}"), |b| {
            b.iter(|| {
                let params = Alg1Params { p, f: 1, fault_kind: FaultKind::Edge };
                build_alg1_spanner(black_box(&g), params, &mut SourcewiseFactory::new(kind, FaultKind::Edge)).unwrap()
            })
        });
    }
    group.finish();
}

fn verification(c: &mut Criterion) {
    let g = gnp(60, 0.15);
    let p = recommended_p(g.n(), FactoryKind::Preserver, FaultKind::Edge);
    let params = Alg1Params { p, f: 1, fault_kind: FaultKind::Edge };
    let (h, _) =
        build_alg1_spanner(&g, params, &mut SourcewiseFactory::new(FactoryKind::Preserver, FaultKind::Edge)).unwrap();
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("exhaustive-f1-n60", |b| {
        b.iter(|| verify_claim(&g, black_box(&h), VerifyMode::Exhaustive).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bfs, builders, verification);
criterion_main!(benches);
