//! Multi-seed sweeps: rayon pool against the sequential fallback.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use baga::colony::{ColonyConfig, Protocol};
use baga::problems::ProblemKind;
use baga::sweep::run_seeds_sequential;

fn sweeps(c: &mut Criterion) {
    let seeds: Vec<u64> = (1..=8).collect();
    let mut group = c.benchmark_group("sweep_8_seeds");
    group.sample_size(10);
    for (kind, protocol) in [
        (ProblemKind::SineRatio, Protocol::SP),
        (ProblemKind::KnapsackImproved, Protocol::SP),
        (ProblemKind::Hamiltonian3, Protocol::P),
    ] {
        let cfg = ColonyConfig::preset(kind, protocol, 0);
        group.bench_with_input(BenchmarkId::new("sequential", kind), &cfg, |b, cfg| {
            b.iter(|| black_box(run_seeds_sequential(cfg, &seeds)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", kind), &cfg, |b, cfg| {
            b.iter(|| black_box(baga::sweep::run_seeds_parallel(cfg, &seeds, None).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
