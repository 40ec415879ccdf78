use criterion::{black_box, criterion_group, criterion_main, Criterion};
use mott_core::roots::logspace;
use mott_core::steady_state::default_locus_grid;
use mott_core::*;

fn model(c: &mut Criterion) {
    let k = ModelCoefficients::default_device();
    let x = StateFraction::new(0.3).unwrap();
    c.bench_function("kinetic_voltage", |b| b.iter(|| kinetic_voltage(black_box(x), black_box(0.5), &k)));
    c.bench_function("enthalpy_derivative", |b| b.iter(|| enthalpy_derivative(black_box(x), &k)));
}

fn steady(c: &mut Criterion) {
    let k = ModelCoefficients::default_device();
    let grid = default_locus_grid();
    c.bench_function("dc_locus_3999", |b| b.iter(|| dc_locus(black_box(&grid), &k).unwrap()));
    c.bench_function("saddle_node_voltage", |b| b.iter(|| saddle_node_voltage(&k).unwrap()));
}

fn small_signal(c: &mut Criterion) {
    let k = ModelCoefficients::default_device();
    let (i, f) = (logspace(1e-6, 2e-3, 100), logspace(1e6, 1e12, 100));
    c.bench_function("rez_map_100x100", |b| b.iter(|| rez_map(black_box(&i), &f, &k).unwrap()));
}

fn circuit(c: &mut Criterion) {
    let k = ModelCoefficients::default_device();
    let cp = CircuitParams::new(3400.0, 1e-12, 1.0).unwrap();
    c.bench_function("pa_operating_points", |b| b.iter(|| pa_operating_points(black_box(&cp), &k).unwrap()));
    c.bench_function("critical_rs", |b| {
        b.iter(|| critical_parameter(Param::Rs, &cp.with(Param::Vdc, 1.2), &k, (1e3, 7e3)).unwrap())
    });
}

fn dynamics(c: &mut Criterion) {
    let k = ModelCoefficients::default_device();
    let cp = CircuitParams::new(3400.0, 1e-12, 1.2).unwrap();
    let mut g = c.benchmark_group("dynamics");
    g.sample_size(10);
    g.bench_function("integrate_cycle_200tau", |b| {
        b.iter(|| integrate((0.1, 0.39), &cp, &k, &IntegrateOptions::new(680e-9)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, model, steady, small_signal, circuit, dynamics);
criterion_main!(benches);
