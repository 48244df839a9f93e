//! Sequential vs rayon execution of the embarrassingly parallel paths:
//! the bracketing scan in shooting and windowed hypothesis sampling.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use fdelab_core::fde::CoeffFunction;
use fdelab_core::hypothesis::{theorem_verdict, TheoremId, VerdictOptions};
use fdelab_core::models::{make_delay_eq, make_power_monostable};
use fdelab_core::solver::{shoot_terminal, SolveConfig};
use fdelab_core::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn delay_eq() -> fdelab_core::fde::Equation {
    let g = make_power_monostable(1.0, 1.0).unwrap();
    let c = 0.5 * (-0.25f64).exp();
    make_delay_eq(g, CoeffFunction::constant(0.25), 0.0, c, 1.0).unwrap()
}

fn shooting(c: &mut Criterion) {
    let eq = delay_eq();
    let mut group = c.benchmark_group("shoot_terminal");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SolveConfig {
            step: 1e-2,
            exec,
            ..SolveConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| shoot_terminal(black_box(&eq), -20.0, 0.0, eq.c, cfg).unwrap())
        });
    }
    group.finish();
}

fn verdicts(c: &mut Criterion) {
    let eq = delay_eq();
    let mut group = c.benchmark_group("theorem_verdict");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut opts = VerdictOptions::new(40.0, 1e-2);
        opts.exec = exec;
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| theorem_verdict(black_box(&eq), TheoremId::BoundedExistence, opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, shooting, verdicts);
criterion_main!(benches);
