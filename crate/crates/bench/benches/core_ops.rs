//! Benchmarks for the hot paths: exact best responses, payoff matrices,
//! equilibrium solves, mixture aggregation, and posterior episodes.

use criterion::{criterion_group, criterion_main, Criterion};
use simplexpop_core::{
    aggregate_mixture, cross_payoff_matrix, exact_best_response, expected_value,
    point_matching_policy, random_policy, simulate_posterior_episode, solve_zero_sum_nash,
    uniform_random_policy, GameSpec, MixtureWeights, PayoffMatrix, RngForge, TabularPolicy,
    NASH_TOL,
};
use std::hint::black_box;

fn policies(spec: GameSpec, n: usize) -> Vec<TabularPolicy> {
    let forge = RngForge::new(9);
    (0..n)
        .map(|i| random_policy(spec, &mut forge.fork(&format!("policy{i}"))).unwrap())
        .collect()
}

fn antisymmetric(n: usize) -> PayoffMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = ((i * 31 + j * 17) as f64).sin();
            rows[i][j] = v;
            rows[j][i] = -v;
        }
    }
    PayoffMatrix::new(rows).unwrap()
}

fn bench_core_ops(c: &mut Criterion) {
    let k5 = GameSpec::new(5).unwrap();
    let k4 = GameSpec::new(4).unwrap();
    let uniform5 = uniform_random_policy(k5).unwrap();
    let pm5 = point_matching_policy(k5).unwrap();

    let mut group = c.benchmark_group("core_ops");
    group.sample_size(20);

    group.bench_function("exact_best_response_k5", |b| {
        b.iter(|| exact_best_response(black_box(&uniform5)).unwrap())
    });

    group.bench_function("expected_value_k5", |b| {
        b.iter(|| expected_value(black_box(&pm5), black_box(&uniform5)).unwrap())
    });

    let pop4 = policies(k4, 6);
    group.bench_function("cross_payoff_matrix_k4_6x6", |b| {
        b.iter(|| cross_payoff_matrix(black_box(&pop4), black_box(&pop4)).unwrap())
    });

    let game16 = antisymmetric(16);
    group.bench_function("solve_zero_sum_nash_16", |b| {
        b.iter(|| solve_zero_sum_nash(black_box(&game16), NASH_TOL).unwrap())
    });

    let pop5 = policies(k5, 8);
    let sigma = MixtureWeights::uniform(8);
    group.bench_function("aggregate_mixture_k5_8", |b| {
        b.iter(|| aggregate_mixture(black_box(&pop5), black_box(&sigma)).unwrap())
    });

    let candidates = vec![uniform5.clone(), pm5.clone(), pop5[0].clone()];
    let prior = MixtureWeights::uniform(3);
    let forge = RngForge::new(42);
    group.bench_function("posterior_episode_k5", |b| {
        let mut i = 0u64;
        b.iter(|| {
            i += 1;
            let mut rng = forge.fork(&format!("episode{i}"));
            simulate_posterior_episode(
                black_box(&uniform5),
                black_box(&pm5),
                black_box(&candidates),
                black_box(&prior),
                &mut rng,
            )
            .unwrap()
        })
    });

    group.finish();
}

criterion_group!(benches, bench_core_ops);
criterion_main!(benches);
