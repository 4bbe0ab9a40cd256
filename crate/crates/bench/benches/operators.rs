use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hardy_amalgam::crsys::HalfDerivativeMode;
use hardy_amalgam::*;
use std::hint::black_box;

fn band(spec: GridSpec) -> GridFunction {
    sample(&FunctionSpec::BandLimited { seed: 1, low: 0.125, high: 0.5 }, spec).unwrap()
}

fn norms(c: &mut Criterion) {
    let mut g = c.benchmark_group("amalgam_norm");
    let e = Exponents::new(1.5, 3.0).unwrap();
    for (d, l, n) in [(1, 32.0, 4096), (2, 8.0, 256)] {
        let f = band(make_grid(d, l, n).unwrap());
        g.bench_function(BenchmarkId::new("discrete", format!("d{d}")), |b| {
            b.iter(|| amalgam_norm(black_box(&f), e, Window::Discrete).unwrap())
        });
        g.bench_function(BenchmarkId::new("ball", format!("d{d}")), |b| {
            b.iter(|| amalgam_norm(black_box(&f), e, Window::Ball).unwrap())
        });
    }
    g.finish();
}

fn transforms(c: &mut Criterion) {
    let f = band(make_grid(2, 8.0, 256).unwrap());
    let tg = TimeGrid::log_spaced(1e-3, 64.0, 48).unwrap();
    let mut g = c.benchmark_group("d2");
    g.sample_size(10);
    g.bench_function("riesz", |b| b.iter(|| riesz(black_box(&f), 1).unwrap()));
    g.bench_function("heat_extension", |b| b.iter(|| extend(black_box(&f), KernelTag::Heat, &tg).unwrap()));
    g.finish();
}

fn lifts(c: &mut Criterion) {
    let f = band(make_grid(1, 32.0, 4096).unwrap());
    let tg = TimeGrid::log_spaced(1e-3, 64.0, 48).unwrap();
    let field = caloric_lift(&f, &tg).unwrap();
    let e = Exponents::new(1.0, 1.0).unwrap();
    let mut g = c.benchmark_group("d1");
    g.sample_size(10);
    g.bench_function("hardy_norm_maximal", |b| b.iter(|| hardy_norm_maximal(black_box(&f), e, &tg).unwrap()));
    g.bench_function("caloric_cr_spectral", |b| {
        b.iter(|| caloric_cr_residual(black_box(&field), HalfDerivativeMode::Spectral).unwrap())
    });
    g.bench_function("caloric_cr_quadrature", |b| {
        b.iter(|| caloric_cr_residual(black_box(&field), HalfDerivativeMode::Quadrature).unwrap())
    });
    g.finish();
}

criterion_group!(benches, norms, transforms, lifts);
criterion_main!(benches);
