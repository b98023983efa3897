use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use weakval_bench::{operator_and_state, pointer_triple};
use weakval_core::dirac::{computational_basis, dirac_distribution_full, fourier_basis};
use weakval_core::phase;
use weakval_core::pointer::{evolve_and_postselect, monte_carlo_clicks, PointerConfig};
use weakval_core::polar_decompose;
use weakval_core::pt::{self, PTParams};
use weakval_core::sampling::{random_state, rng};
use weakval_core::weak::expectation_via_right_polar;

fn polar(c: &mut Criterion) {
    let mut group = c.benchmark_group("polar_decompose");
    for n in [2, 4, 8, 16, 32] {
        let (a, _) = operator_and_state(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| polar_decompose(black_box(a)))
        });
    }
    group.finish();
}

fn weak_route(c: &mut Criterion) {
    let mut group = c.benchmark_group("expectation_via_right_polar");
    for n in [2, 8, 32] {
        let (a, psi) = operator_and_state(n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &(a, psi), |b, (a, psi)| {
            b.iter(|| expectation_via_right_polar(black_box(a), black_box(psi)))
        });
    }
    group.finish();
}

fn pt_closed_form(c: &mut Criterion) {
    let p = PTParams::new(0.8, 1.7, 0.6, 0.9).unwrap();
    c.bench_function("pt_polar_closed_form", |b| {
        b.iter(|| pt::pt_polar_closed_form(black_box(&p)))
    });
}

fn pointer(c: &mut Criterion) {
    let (rm, pre, post) = pointer_triple(3, 3);
    let mut group = c.benchmark_group("pointer");
    for grid in [256, 1024, 4096] {
        let cfg = PointerConfig {
            grid_points: grid,
            ..PointerConfig::default()
        };
        group.bench_with_input(BenchmarkId::new("evolve_and_postselect", grid), &cfg, |b, cfg| {
            b.iter(|| evolve_and_postselect(&rm, &pre, &post, black_box(cfg)))
        });
    }
    group.sample_size(10);
    group.bench_function("monte_carlo_clicks_1e5", |b| {
        b.iter(|| monte_carlo_clicks(&rm, &pre, &post, &PointerConfig::default(), black_box(100_000)))
    });
    group.finish();
}

fn phase_sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("phase");
    group.sample_size(10);
    group.bench_function("ramanujan_sweep_100", |b| {
        b.iter(|| phase::ramanujan_sweep(black_box(100), 0.0))
    });
    group.finish();
}

fn dirac(c: &mut Criterion) {
    let mut group = c.benchmark_group("dirac_distribution_full");
    for d in [4, 8, 16] {
        let psi = random_state(&mut rng(4), d);
        let (b, cb) = (computational_basis(d), fourier_basis(d));
        group.bench_with_input(BenchmarkId::from_parameter(d), &psi, |bench, psi| {
            bench.iter(|| dirac_distribution_full(&b, &cb, black_box(psi)))
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    polar,
    weak_route,
    pt_closed_form,
    pointer,
    phase_sweeps,
    dirac
);
criterion_main!(benches);
