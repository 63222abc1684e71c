//! Benchmarks for the hot paths: regression, both fit modes, occupancy
//! search, and uniform allocation sampling.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use incomelaw::regress::ols_fit;
use incomelaw::{allocsim, expofit};
use incomelaw::{AllocationSpace, FitMode, TruncationConfig};
use incomelaw_bench::{noisy_sample, regression_inputs};

fn bench_ols_fit(c: &mut Criterion) {
    let (xs, ys) = regression_inputs(1, 100);
    c.bench_function("ols_fit/100", |b| {
        b.iter(|| ols_fit(black_box(&xs), black_box(&ys)).unwrap())
    });
}

fn bench_fit_modes(c: &mut Criterion) {
    let sample = noisy_sample(2, 5000.0, 10_000.0, 100_000, 100);
    let two_stage = TruncationConfig::default();
    let corollary1 = TruncationConfig {
        mode: FitMode::Corollary1,
        ..two_stage
    };

    c.bench_function("fit_two_stage/100pts", |b| {
        b.iter(|| expofit::fit(black_box(&sample), &two_stage).unwrap())
    });
    c.bench_function("fit_corollary1/100pts", |b| {
        b.iter(|| expofit::fit(black_box(&sample), &corollary1).unwrap())
    });
}

fn bench_argmax_occupancy(c: &mut Criterion) {
    let space = AllocationSpace::new(30, 60).unwrap();
    c.bench_function("argmax_occupancy/30x60", |b| {
        b.iter(|| allocsim::argmax_occupancy(black_box(&space)).unwrap())
    });
}

fn bench_sample_uniform(c: &mut Criterion) {
    let space = AllocationSpace::new(1000, 5000).unwrap();
    c.bench_function("sample_uniform/1000x5000x10", |b| {
        b.iter(|| allocsim::sample_uniform(black_box(&space), 7, 10))
    });
}

criterion_group!(
    benches,
    bench_ols_fit,
    bench_fit_modes,
    bench_argmax_occupancy,
    bench_sample_uniform
);
criterion_main!(benches);
