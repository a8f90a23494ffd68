use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use scclab_core::{
    critical_probability, forward_dfs, mdm_distance, ranked_scc_sequence, run_identification, sample_directed_gnp,
    sample_excursion, tarjan_scc, Mdm, Seed,
};

fn bench_gnp(c: &mut Criterion) {
    let mut group = c.benchmark_group("gnp");
    for n in [10_000usize, 100_000] {
        let p = critical_probability(n, 0.0).unwrap();
        group.bench_with_input(BenchmarkId::new("sample_directed", n), &n, |b, &n| {
            b.iter(|| sample_directed_gnp(n, p, Seed(1)).unwrap())
        });
    }
    group.finish();
}

fn bench_graph_kernels(c: &mut Criterion) {
    let n = 100_000;
    let g = sample_directed_gnp(n, critical_probability(n, 0.0).unwrap(), Seed(2)).unwrap();
    c.bench_function("forward_dfs/100000", |b| b.iter(|| forward_dfs(black_box(&g))));
    c.bench_function("tarjan/100000", |b| b.iter(|| tarjan_scc(black_box(&g))));
    c.bench_function("ranked_scc/100000", |b| b.iter(|| ranked_scc_sequence(black_box(&g), 5)));
}

fn bench_identification(c: &mut Criterion) {
    let f = sample_excursion(1.0, 4096, Seed(3)).unwrap().scaled(2.0);
    let mut i = 0u64;
    c.bench_function("identification/4096", |b| {
        b.iter(|| {
            i += 1;
            run_identification(&f, Seed(i)).unwrap()
        })
    });
}

fn bench_distance(c: &mut Criterion) {
    let theta = Mdm::from_triples(2, &[(0, 1, 0.3), (1, 0, 0.5), (0, 1, 0.2)]).unwrap();
    let other = Mdm::from_triples(2, &[(0, 1, 0.25), (1, 0, 0.55), (1, 0, 0.2)]).unwrap();
    c.bench_function("mdm_distance/theta", |b| b.iter(|| mdm_distance(black_box(&theta), black_box(&other))));
}

criterion_group!(benches, bench_gnp, bench_graph_kernels, bench_identification, bench_distance);
criterion_main!(benches);
