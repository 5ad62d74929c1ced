use criterion::{criterion_group, criterion_main, Criterion};
use hhc_bench::{medium_instance, micro_instance};
use hhc_core::{
    check_feasibility, generate, greedy_construct, solve_exact, tabu_improve, GeneratorParams,
    PenaltyWeights, Rational, SolveLimits, TabuParams,
};
use std::hint::black_box;
use std::time::Duration;

fn weights() -> PenaltyWeights {
    PenaltyWeights::new("2".parse().unwrap(), "1".parse().unwrap()).unwrap()
}

fn bench_generate(c: &mut Criterion) {
    c.bench_function("generate/n10_m20_s4", |b| {
        b.iter(|| {
            let params = GeneratorParams {
                caregivers: 10,
                patients: 20,
                services: 4,
                seed: 42,
                ..GeneratorParams::default()
            };
            black_box(generate(&params).unwrap())
        })
    });
}

fn bench_greedy(c: &mut Criterion) {
    let instance = medium_instance(42);
    c.bench_function("greedy_construct/n10_m20_s4", |b| {
        b.iter(|| black_box(greedy_construct(black_box(&instance), Rational::one()).unwrap()))
    });
}

fn bench_feasibility(c: &mut Criterion) {
    let instance = medium_instance(42);
    let (assignment, _) = greedy_construct(&instance, Rational::one()).unwrap();
    c.bench_function("check_feasibility/n10_m20_s4", |b| {
        b.iter(|| black_box(check_feasibility(&instance, black_box(&assignment)).unwrap()))
    });
}

fn bench_tabu(c: &mut Criterion) {
    let instance = medium_instance(42);
    let w = weights();
    let (initial, _) = greedy_construct(&instance, Rational::one()).unwrap();
    let params = TabuParams {
        time_limit: Duration::from_millis(50),
        tenure: 7,
        max_stall: 5,
        seed: 1,
    };
    c.bench_function("tabu_improve/n10_m20_s4_50ms", |b| {
        b.iter(|| black_box(tabu_improve(&instance, &w, black_box(&initial), &params).unwrap()))
    });
}

fn bench_exact(c: &mut Criterion) {
    let instance = micro_instance(7);
    let w = weights();
    c.bench_function("solve_exact/micro", |b| {
        b.iter(|| black_box(solve_exact(black_box(&instance), &w, &SolveLimits::default()).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_generate,
    bench_greedy,
    bench_feasibility,
    bench_tabu,
    bench_exact
);
criterion_main!(benches);
