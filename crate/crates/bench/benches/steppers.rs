use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lowreg::opfunc::{psi2, CoefficientSet};
use lowreg::{Method, SpectralSpace, Stepper, TorusGrid};
use lowreg_bench::fixture;
use std::hint::black_box;

fn single_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for n in [256, 1024] {
        let (system, state) = fixture(n, 2.0);
        for method in [Method::Lri3, Method::Etdrk3, Method::Gautschi2, Method::Strang2] {
            let stepper = Stepper::new(&system, method, 2f64.powi(-6)).unwrap();
            group.bench_with_input(BenchmarkId::new(method.name(), n), &state, |b, s| {
                b.iter(|| stepper.step(&system, black_box(s)).unwrap())
            });
        }
    }
    group.finish();
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft");
    for (dim, n) in [(1, 4096), (2, 128), (3, 32)] {
        let space = SpectralSpace::new(TorusGrid::periodic(dim, n).unwrap());
        let values: Vec<f64> = (0..space.grid().len()).map(|i| (i as f64 * 0.37).sin()).collect();
        group.bench_function(BenchmarkId::new("round_trip", format!("{dim}d-{n}")), |b| {
            b.iter(|| space.to_physical(&space.to_spectral(black_box(&values)).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn coefficients(c: &mut Criterion) {
    let (system, _) = fixture(4096, 2.0);
    c.bench_function("coefficient_tables/4096", |b| {
        b.iter(|| CoefficientSet::build(system.symbols(), black_box(2f64.powi(-6))))
    });
    let args: Vec<f64> = (0..10_000).map(|i| i as f64 * 1e-2).collect();
    c.bench_function("psi2_scan/10k", |b| b.iter(|| args.iter().map(|&m| psi2(black_box(m))).sum::<f64>()));
}

criterion_group!(benches, single_step, transforms, coefficients);
criterion_main!(benches);
