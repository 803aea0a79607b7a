use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use loewner_lab::estimators::{estimate_moment, radial_theta_simulate};
use loewner_lab::loewner::{
    forward_flow, shifted_inverse, slit_forward, tip_profile, trace_point,
};
use loewner_lab::Complex64;
use loewner_lab_bench::{brownian_chain, probe_point};

fn slit_maps(c: &mut Criterion) {
    let z = Complex64::new(0.3, 0.8);
    c.bench_function("slit_forward", |b| {
        b.iter(|| slit_forward(black_box(z), 0.1, 1.0, 1e-3))
    });
}

fn flows(c: &mut Criterion) {
    let chain = brownian_chain(8.0 / 3.0, 4096, 1);
    let z = probe_point();
    c.bench_function("forward_flow_4096", |b| {
        b.iter(|| forward_flow(black_box(&chain), z))
    });
    c.bench_function("shifted_inverse_4096", |b| {
        b.iter(|| shifted_inverse(black_box(&chain), Complex64::new(0.0, 0.01), 4096))
    });
    c.bench_function("trace_point_4096", |b| {
        b.iter(|| trace_point(black_box(&chain), 4096, None))
    });
    let grid: Vec<f64> = (0..10).map(|j| 2f64.powi(-j)).collect();
    c.bench_function("tip_profile_4096", |b| {
        b.iter(|| tip_profile(black_box(&chain), 4096, &grid))
    });
}

fn estimators(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimators");
    g.sample_size(10);
    g.bench_function("moment_1000_samples_t2_t4", |b| {
        b.iter(|| estimate_moment(8.0 / 3.0, 4.0 / 3.0, &[2.0, 4.0], 1000, black_box(1)))
    });
    g.bench_function("radial_1000_paths", |b| {
        b.iter(|| radial_theta_simulate(2.0, 0.6, 1.5, 1.0, 1000, black_box(1)))
    });
    g.finish();
}

criterion_group!(benches, slit_maps, flows, estimators);
criterion_main!(benches);
