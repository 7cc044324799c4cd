use std::hint::black_box;

use ballwalk_core::analysis::GridPolicy;
use ballwalk_core::eigen::{lanczos_largest, LanczosOptions};
use ballwalk_core::multiplier::eval_gd;
use ballwalk_core::{Density, LinearOperator, RadialDensity, Scheme};
use criterion::{criterion_group, criterion_main, Criterion};

fn ball_mass(c: &mut Criterion) {
    let rho1 = Density::gaussian(1, 0.5).unwrap();
    let rho2 = Density::tempered(2, 1.0, 1.0).unwrap();
    c.bench_function("ball_mass_ratio/gaussian_d1", |b| {
        b.iter(|| rho1.ball_mass_ratio(black_box(&[2.3]), 0.25).unwrap())
    });
    c.bench_function("ball_mass_ratio/tempered_d2", |b| {
        b.iter(|| rho2.ball_mass_ratio(black_box(&[1.7, -0.4]), 0.25).unwrap())
    });
}

fn multiplier(c: &mut Criterion) {
    c.bench_function("eval_gd/d2_sweep", |b| {
        b.iter(|| (0..200).map(|i| eval_gd(2, black_box(0.15 * i as f64))).sum::<f64>())
    });
}

fn matvec(c: &mut Criterion) {
    let rho = Density::gaussian(1, 0.5).unwrap();
    let mut group = c.benchmark_group("matvec_d1");
    for scheme in [Scheme::BandedQuadrature, Scheme::FourierMultiplier] {
        let op = GridPolicy::new(12.0, 20.0, scheme).conjugated(&rho, 0.25).unwrap();
        let x: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut y = vec![0.0; op.dim()];
        group.bench_function(scheme.name(), |b| b.iter(|| op.apply(black_box(&x), &mut y)));
    }
    group.finish();
}

fn lanczos(c: &mut Criterion) {
    let rho = Density::gaussian(1, 0.5).unwrap();
    let op = GridPolicy::new(12.0, 40.0, Scheme::FourierMultiplier)
        .conjugated(&rho, 0.25)
        .unwrap();
    let mut group = c.benchmark_group("lanczos");
    group.sample_size(10);
    group.bench_function("gaussian_d1_top4", |b| {
        b.iter(|| lanczos_largest(&op, 4, &LanczosOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, ball_mass, multiplier, matvec, lanczos);
criterion_main!(benches);
