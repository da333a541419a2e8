use std::hint::black_box;

use auxmean::estimator::{NormMode, ProblemSpec};
use auxmean::exec::Execution;
use auxmean::experiments::{run_experiment_with, ExperimentConfig};
use auxmean::verify::{check_adversary_optimality_with, check_matrix_optimum_with};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn modes() -> Vec<(&'static str, Execution)> {
    let mut out = vec![("sequential", Execution::Sequential)];
    if Execution::parallel_available() {
        out.push(("parallel", Execution::Parallel));
    }
    out
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    for d in [20, 200] {
        let mut config = ExperimentConfig::reference_default();
        config.spec = ProblemSpec::new(20, 1000, d, 1.0, 1.0, NormMode::Frobenius).unwrap();
        config.trials = 200;
        for (name, exec) in modes() {
            group.bench_with_input(BenchmarkId::new(name, d), &config, |b, cfg| {
                b.iter(|| run_experiment_with(black_box(cfg), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn oracles(c: &mut Criterion) {
    let spec = ProblemSpec::new(10, 100, 5, 0.5, 1.0, NormMode::Trace).unwrap();
    let mut group = c.benchmark_group("oracles");
    group.sample_size(20);
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::new("matrix_optimum", name), |b| {
            b.iter(|| check_matrix_optimum_with(black_box(&spec), 1000, 0.1, 1, exec).unwrap())
        });
        group.bench_function(BenchmarkId::new("adversary_optimality", name), |b| {
            b.iter(|| check_adversary_optimality_with(black_box(&spec), 0.5, 500, 1, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, oracles);
criterion_main!(benches);
