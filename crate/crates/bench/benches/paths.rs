use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pseudofsr::screening::ScreenResult;
use pseudofsr::solvers::lambda_grid;
use pseudofsr::{estimate_fsr, fit_path, fsr_replicate, Family, FitOptions, FsrConfig};
use pseudofsr_bench::dataset;

fn paths(c: &mut Criterion) {
    let opts = FitOptions::default();
    let mut group = c.benchmark_group("fit_path");
    group.sample_size(20);
    for family in [Family::Linear, Family::Logistic, Family::Cox] {
        let data = dataset(family, 200, 50);
        let grid = lambda_grid(data.x.view(), &data.y, 100, 1e-3, &opts).unwrap();
        group.bench_function(BenchmarkId::from_parameter(family), |b| {
            b.iter(|| fit_path(black_box(data.x.view()), &data.y, &grid, &opts).unwrap())
        });
    }
    group.finish();
}

fn replicate(c: &mut Criterion) {
    let opts = FitOptions::default();
    let data = dataset(Family::Linear, 200, 50);
    let grid = lambda_grid(data.x.view(), &data.y, 100, 1e-3, &opts).unwrap();
    let screened = ScreenResult::fixed(data.x.view(), &data.support).unwrap();
    let mut seed = 0;
    c.bench_function("fsr_replicate/linear", |b| {
        b.iter(|| {
            seed += 1;
            fsr_replicate(data.x.view(), &data.y, &screened, &grid, true, seed, &opts).unwrap()
        })
    });

    let cfg = FsrConfig { b_replicates: 20, ..FsrConfig::default() };
    let mut group = c.benchmark_group("estimate_fsr");
    group.sample_size(10);
    group.bench_function("linear_cv_b20", |b| b.iter(|| estimate_fsr(data.x.view(), &data.y, &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, paths, replicate);
criterion_main!(benches);
