use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use rabimod::dynamics::pmax_sweep;
use rabimod::opensys::{flux_sweep, FluxOptions};
use rabimod::{Jobs, ModelParams, SolverSettings};

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn settings(jobs: Jobs) -> SolverSettings {
    SolverSettings { jobs: Some(jobs.0), ..SolverSettings::default() }
}

fn pmax(c: &mut Criterion) {
    let p = ModelParams { g: 0.05, xi: 2.40483, n_fock: 6, ..ModelParams::default() };
    let nu = grid(1.9, 2.1, 16);
    let mut group = c.benchmark_group("pmax_sweep");
    group.sample_size(10);
    for (name, jobs) in [("sequential", Jobs::SEQUENTIAL), ("parallel", Jobs::ALL)] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &jobs, |b, &jobs| {
            b.iter(|| pmax_sweep(&p, &nu, 400.0, &settings(jobs)).unwrap())
        });
    }
    group.finish();
}

fn flux(c: &mut Criterion) {
    let p = ModelParams { g: 0.05, xi: 1.84118, gamma_a: 0.02, gamma_c: 0.02, n_fock: 4, ..ModelParams::default() };
    let nu = grid(1.9, 2.1, 8);
    let opts = FluxOptions { horizon: Some(900.0), samples_per_window: 50, ..FluxOptions::default() };
    let mut group = c.benchmark_group("flux_sweep");
    group.sample_size(10);
    for (name, jobs) in [("sequential", Jobs::SEQUENTIAL), ("parallel", Jobs::ALL)] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &jobs, |b, &jobs| {
            b.iter(|| flux_sweep(&p, &nu, &settings(jobs), &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pmax, flux);
criterion_main!(benches);
