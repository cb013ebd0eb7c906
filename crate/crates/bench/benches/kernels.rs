use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ruij_core::operators::{composed_qq_kernel, kernel_identity_residual};
use ruij_core::special_functions::{s2, DoubleSine};
use ruij_core::wavefunction::{psi_with, Psi2Table};
use ruij_core::{Complex64, ComplexTuple, Model, ModelParams, Periods, QuadratureSpec, WaveSpec};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn model() -> Model {
    Model::new(ModelParams::real(1.0, std::f64::consts::SQRT_2, 0.6).unwrap()).unwrap()
}

fn double_sine(cr: &mut Criterion) {
    let p = Periods::real(1.0, std::f64::consts::SQRT_2).unwrap();
    let spec = QuadratureSpec::default();
    let ds = DoubleSine::new(p.clone(), &spec);
    let mut g = cr.benchmark_group("s2");
    for z in [c(1.2, 0.3), c(1.2, 4.0), c(-3.1, 0.7)] {
        g.bench_with_input(BenchmarkId::new("direct", format!("{z}")), &z, |b, &z| b.iter(|| s2(black_box(z), &p, &spec)));
        g.bench_with_input(BenchmarkId::new("table", format!("{z}")), &z, |b, &z| b.iter(|| ds.ln_s2_fast(black_box(z))));
    }
    g.finish();
}

fn model_functions(cr: &mut Criterion) {
    let m = model();
    let mut g = cr.benchmark_group("model");
    g.bench_function("mu", |b| b.iter(|| m.mu(black_box(c(0.7, 0.0)))));
    g.bench_function("k", |b| b.iter(|| m.kfun(black_box(c(0.7, 0.0)))));
    g.bench_function("k_hat", |b| b.iter(|| m.k_hat(black_box(c(0.3, 0.0)))));
    g.finish();
}

fn kernel_identity(cr: &mut Criterion) {
    let x = ComplexTuple::new(vec![c(0.3, 0.1), c(-0.7, 0.2), c(1.1, -0.3), c(0.05, 0.4)]);
    let y = ComplexTuple::new(vec![c(0.5, -0.2), c(-0.2, 0.3), c(0.9, 0.1), c(-1.3, 0.0)]);
    cr.bench_function("kernel_identity/n4_r2", |b| b.iter(|| kernel_identity_residual(&x, &y, black_box(c(0.4, 0.2)), 2)));
}

fn wave_functions(cr: &mut Criterion) {
    let m = model();
    let spec = QuadratureSpec::with_tolerances(1e-8, 1e-11);
    let mut g = cr.benchmark_group("psi");
    g.sample_size(10);
    let w2 = WaveSpec::new(ComplexTuple::real(&[0.3, -0.2]), ComplexTuple::real(&[0.1, 0.5]), *m.params(), spec.clone());
    g.bench_function("n2", |b| b.iter(|| psi_with(&m, black_box(&w2))));
    g.bench_function("n2_table_build", |b| b.iter(|| Psi2Table::new(&m, [c(0.3, 0.0), c(-0.2, 0.0)], 20.0, &spec)));
    let loose = QuadratureSpec::with_tolerances(1e-5, 1e-8);
    let w3 = WaveSpec::new(ComplexTuple::real(&[0.3, -0.2, 0.1]), ComplexTuple::real(&[0.1, 0.5, -0.3]), *m.params(), loose);
    g.bench_function("n3", |b| b.iter(|| psi_with(&m, black_box(&w3))));
    g.finish();
}

fn composed_kernels(cr: &mut Criterion) {
    let m = model();
    let spec = QuadratureSpec::with_tolerances(1e-7, 1e-10);
    let (x, z) = (ComplexTuple::real(&[0.2]), ComplexTuple::real(&[-0.4]));
    let mut g = cr.benchmark_group("composed");
    g.sample_size(10);
    g.bench_function("qq_n1", |b| b.iter(|| composed_qq_kernel(&x, &z, c(0.1, 0.05), c(-0.2, 0.0), &m, &spec)));
    g.finish();
}

criterion_group!(benches, double_sine, model_functions, kernel_identity, wave_functions, composed_kernels);
criterion_main!(benches);
