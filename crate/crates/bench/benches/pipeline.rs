use biorth::bops::{build_system, BuildMethod};
use biorth::coeffs::CoeffSet;
use biorth::deform::{rebuild, run_rk4};
use biorth::moments::weight_moments;
use biorth::suites::default_trajectory;
use biorth::{Config, Evaluator};
use biorth_bench::{laurent, strict, strict_moments};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn moments(c: &mut Criterion) {
    let cfg = Config::default();
    let w = strict();
    c.bench_function("strict_moments_window_128", |b| b.iter(|| weight_moments(black_box(&w), 128, &cfg).unwrap()));
}

fn systems(c: &mut Criterion) {
    let cfg = Config::default();
    let tbl = strict_moments(&cfg);
    let lt = laurent(40);
    c.bench_function("gram_lu_n16", |b| b.iter(|| build_system(black_box(&tbl), 16, BuildMethod::GramLu, &cfg).unwrap()));
    c.bench_function("szego_n16", |b| b.iter(|| build_system(black_box(&tbl), 16, BuildMethod::Szego, &cfg).unwrap()));
    c.bench_function("laurent_both_n32", |b| b.iter(|| build_system(black_box(&lt), 32, BuildMethod::Both, &cfg).unwrap()));
}

fn coefficient_functions(c: &mut Criterion) {
    let cfg = Config::default();
    let tbl = strict_moments(&cfg);
    let ev = Evaluator::new(build_system(&tbl, 8, BuildMethod::GramLu, &cfg).unwrap(), Some(strict()), &cfg).unwrap();
    c.bench_function("coeff_set_n6", |b| b.iter(|| CoeffSet::build(black_box(&ev), 6, &cfg).unwrap()));
}

fn flow(c: &mut Criterion) {
    let cfg = Config::default();
    let traj = default_trajectory();
    let (s0, _) = rebuild(&strict(), &traj, 3, 3, 0.0, &cfg).unwrap();
    c.bench_function("rk4_64_steps_n3", |b| b.iter(|| run_rk4(black_box(&s0), &traj, 64).unwrap()));
}

criterion_group!(benches, moments, systems, coefficient_functions, flow);
criterion_main!(benches);
