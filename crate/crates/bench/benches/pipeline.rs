use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use c2knn::baselines::{run_bruteforce, run_greedy_full, run_lsh, LshParams};
use c2knn::clustering::{build_clusters, ClusteringConfig};
use c2knn::pipeline::{build_c2, C2Params};
use c2knn::{GreedyParams, OracleMode};
use c2knn_bench::corpus;

const USERS: usize = 2000;

fn algorithms(c: &mut Criterion) {
    let ds = corpus(USERS, 3);
    let oracle = C2Params::default().oracle;
    let mut group = c.benchmark_group("knn_graph");
    group.sample_size(10);
    group.bench_function("c2", |b| {
        b.iter(|| build_c2(&ds, &C2Params::default()).unwrap())
    });
    group.bench_function("bruteforce", |b| {
        b.iter(|| run_bruteforce(&ds, oracle, 30, 0).unwrap())
    });
    group.bench_function("hyrec", |b| {
        let params = GreedyParams {
            parallel: true,
            ..GreedyParams::default()
        };
        b.iter(|| run_greedy_full(&ds, oracle, 30, &params).unwrap())
    });
    group.bench_function("lsh", |b| {
        b.iter(|| run_lsh(&ds, &LshParams::default()).unwrap())
    });
    group.bench_function("c2_exact", |b| {
        let params = C2Params {
            oracle: OracleMode::ExactJaccard,
            ..C2Params::default()
        };
        b.iter(|| build_c2(&ds, &params).unwrap())
    });
    group.finish();
}

fn clustering(c: &mut Criterion) {
    let ds = corpus(USERS, 3);
    let mut group = c.benchmark_group("clustering");
    for t in [1, 4, 8, 16] {
        let cfg = ClusteringConfig::new(t, 4096, 2000, 0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(t), &cfg, |b, cfg| {
            b.iter(|| build_clusters(&ds, cfg))
        });
    }
    group.finish();
}

criterion_group!(benches, algorithms, clustering);
criterion_main!(benches);
