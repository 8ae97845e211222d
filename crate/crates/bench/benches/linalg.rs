use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pseudofsr::linalg::DEFAULT_RANK_TOL;
use pseudofsr::{qr_pivoted, Family, PseudoGenerator};
use pseudofsr_bench::dataset;

fn qr(c: &mut Criterion) {
    let mut group = c.benchmark_group("qr_pivoted");
    for (n, p) in [(100, 20), (200, 50), (200, 200)] {
        let x = dataset(Family::Linear, n, p).x;
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{p}")), &x, |b, x| {
            b.iter(|| qr_pivoted(black_box(x.view()), DEFAULT_RANK_TOL).unwrap())
        });
    }
    group.finish();
}

fn pseudo(c: &mut Criterion) {
    let mut group = c.benchmark_group("pseudo_generation");
    for p in [50, 200] {
        let x = dataset(Family::Linear, 200, p).x;
        let generator = PseudoGenerator::new(x.view(), true, DEFAULT_RANK_TOL).unwrap();
        let screened: Vec<usize> = (0..8).collect();
        let mut seed = 0;
        group.bench_function(BenchmarkId::from_parameter(format!("200x{p}")), |b| {
            b.iter(|| {
                seed += 1;
                generator.generate(black_box(&screened), seed).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, qr, pseudo);
criterion_main!(benches);
