//! Benchmarks of the solver stack: one base shot, the assembled
//! single-ball eigenvalue, the two-ball Newton system at equal and
//! unequal radii, and one volume-sweep record path.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use twisteig::{
    ball_lambda, shoot, twisted_structured, ProblemParams, SourceSpec, TwistedConfig,
};

fn params(p: f64, q: f64, dim: u32) -> ProblemParams {
    ProblemParams::validate(p, q, dim).unwrap()
}

fn bench_shoot(c: &mut Criterion) {
    let pq = params(2.0, 3.0, 2);
    c.bench_function("shoot_base_2_3_2", |b| {
        b.iter(|| {
            let shot = shoot(&pq, SourceSpec::eigen(1.0), black_box(1.0), 20.0, 1e-10).unwrap();
            black_box(shot.first_zero)
        })
    });
}

fn bench_ball(c: &mut Criterion) {
    let pq = params(1.5, 2.0, 3);
    c.bench_function("ball_lambda_1p5_2_3", |b| {
        b.iter(|| black_box(ball_lambda(&pq, black_box(1.0)).unwrap().lambda))
    });
}

fn bench_twisted_equal(c: &mut Criterion) {
    let cfg = TwistedConfig::new(params(2.0, 2.0, 2), 0.7, 0.7).unwrap();
    c.bench_function("twisted_equal_radii", |b| {
        b.iter(|| black_box(twisted_structured(black_box(&cfg)).unwrap().lambda))
    });
}

fn bench_twisted_unequal(c: &mut Criterion) {
    let cfg = TwistedConfig::new(params(2.0, 2.0, 2), 0.6, 0.8).unwrap();
    c.bench_function("twisted_unequal_radii", |b| {
        b.iter(|| black_box(twisted_structured(black_box(&cfg)).unwrap().lambda))
    });
}

criterion_group! {
    name = solvers;
    config = Criterion::default().sample_size(10);
    targets = bench_shoot, bench_ball, bench_twisted_equal, bench_twisted_unequal
}
criterion_main!(solvers);
