use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use pnf_core::*;

fn config(n: usize, rho: f64, gamma: f64) -> GameConfig {
    GameConfig::new(n, rho, 0.1, gamma, BenefitSpec::log1p(1.0)).unwrap()
}

fn bench_best_production(c: &mut Criterion) {
    let cfg = config(10, 0.8, 0.5);
    c.bench_function("best_production s=5.8", |b| {
        b.iter(|| best_production(black_box(5.8), black_box(0.1), &cfg).unwrap())
    });
}

fn bench_gamma_table(c: &mut Criterion) {
    let cfg = config(10, 0.8, 0.5);
    c.bench_function("gamma_region_table n=10", |b| {
        b.iter(|| gamma_region_table(&cfg).unwrap())
    });
}

fn bench_best_response(c: &mut Criterion) {
    let cfg = config(40, 0.9, 0.1605);
    let g = make_topology(
        TopologyKind::Random {
            density: 0.2,
            seed: 1,
        },
        40,
    )
    .unwrap();
    let profile = StrategyProfile::uniform(3.0, g).unwrap();
    c.bench_function("best_response n=40", |b| {
        b.iter(|| best_response(&profile, black_box(0), &cfg, None).unwrap())
    });
}

fn bench_verify(c: &mut Criterion) {
    let cfg = config(20, 0.8, 0.19);
    let iv = gamma_region(5, &cfg).unwrap();
    let mut cfg = cfg;
    cfg.gamma = 0.5 * (iv.gamma_lo + iv.gamma_hi);
    let profile = SymmetricProfile { x: iv.x_s, d: 5 }.realize(20).unwrap();
    c.bench_function("verify_strict_nash regular(5) n=20", |b| {
        b.iter(|| verify_strict_nash(&profile, &cfg, None).unwrap())
    });
}

fn bench_search(c: &mut Criterion) {
    let cfg = config(12, 0.9, 0.1605);
    c.bench_function("search_equilibrium n=12 structured seed", |b| {
        b.iter_batched(
            || cfg.clone(),
            |cfg| search_equilibrium(&cfg, black_box(3), 60).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_social_optimum(c: &mut Criterion) {
    let cfg = config(10, 0.8, 0.5);
    c.bench_function("social_optimum n=10", |b| {
        b.iter(|| social_optimum(&cfg).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_best_production,
              bench_gamma_table,
              bench_best_response,
              bench_verify,
              bench_search,
              bench_social_optimum
}
criterion_main!(benches);
