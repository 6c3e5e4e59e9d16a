use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use c2knn::similarity::{gf_encode, gf_jaccard_unchecked, jaccard};
use c2knn_bench::corpus;

fn pairs(c: &mut Criterion) {
    let ds = corpus(400, 1);
    let n = ds.n_users();
    let mut group = c.benchmark_group("pair_similarity");
    group.throughput(Throughput::Elements(n as u64));

    group.bench_function("exact_jaccard", |b| {
        b.iter(|| {
            (0..n)
                .map(|u| jaccard(ds.profile(0), ds.profile(u as u32)))
                .sum::<f64>()
        })
    });
    for bits in [256, 1024, 4096] {
        let sigs: Vec<_> = ds
            .profiles()
            .iter()
            .map(|p| gf_encode(p, bits, 7).unwrap())
            .collect();
        group.bench_with_input(BenchmarkId::new("goldfinger", bits), &sigs, |b, sigs| {
            b.iter(|| {
                sigs.iter()
                    .map(|s| gf_jaccard_unchecked(&sigs[0], s))
                    .sum::<f64>()
            })
        });
    }
    group.finish();
}

fn encode(c: &mut Criterion) {
    let ds = corpus(400, 1);
    c.bench_function("goldfinger_encode_1024", |b| {
        b.iter(|| {
            for p in ds.profiles() {
                black_box(gf_encode(p, 1024, 7).unwrap());
            }
        })
    });
}

criterion_group!(benches, pairs, encode);
criterion_main!(benches);
