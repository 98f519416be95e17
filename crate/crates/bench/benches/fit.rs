use care_bench::instance;
use care_core::{fit_mle_with_projection, gradient, hessian, projected_hessian_pinv, FitConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn bench_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_mle");
    group.sample_size(10);
    for n in [50, 100, 200] {
        let (truth, data) = instance(n, 5, 0.5, 25, 7);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                fit_mle_with_projection(&data, &truth.covariates, &truth.projection, &FitConfig::default())
                    .expect("fit")
            })
        });
    }
    group.finish();
}

fn bench_derivatives(c: &mut Criterion) {
    let (truth, data) = instance(200, 5, 0.5, 25, 7);
    c.bench_function("gradient_n200", |b| {
        b.iter(|| gradient(black_box(&data), &truth.covariates, &truth.truth).expect("gradient"))
    });
    let h = hessian(&data, &truth.covariates, &truth.truth).expect("hessian");
    c.bench_function("hessian_n200", |b| {
        b.iter(|| hessian(black_box(&data), &truth.covariates, &truth.truth).expect("hessian"))
    });
    let mut group = c.benchmark_group("variance_model");
    group.sample_size(10);
    group.bench_function("pinv_n200", |b| {
        b.iter(|| projected_hessian_pinv(black_box(&h), &truth.projection, 1e-10).expect("pinv"))
    });
    group.finish();
}

criterion_group!(benches, bench_fit, bench_derivatives);
criterion_main!(benches);
