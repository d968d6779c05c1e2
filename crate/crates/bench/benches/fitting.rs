use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use circlefit::baselines::{gauss_newton_fit, kasa_fit, lm_classic_fit, BaselineConfig};
use circlefit::eval::{evaluate_big_circle, evaluate_standard};
use circlefit::oracle::oracle_fit;
use circlefit::{fit, normalize, NormalizedPointSet, PointSet, SolverConfig, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample(seed: u64, n: usize) -> NormalizedPointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if let Ok(data) = normalize(&PointSet::from_xy(&pts).unwrap()) {
            return data;
        }
    }
}

fn bench_evaluators(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    for n in [8usize, 64, 512] {
        let data = sample(5, n);
        let near = Vec2::new(0.4, -0.3);
        let far = Vec2::new(30.0, 40.0);
        group.bench_function(format!("standard/n{n}"), |b| {
            b.iter(|| evaluate_standard(black_box(&data), black_box(near)).unwrap())
        });
        group.bench_function(format!("big_circle/n{n}"), |b| {
            b.iter(|| evaluate_big_circle(black_box(&data), black_box(far)).unwrap())
        });
    }
    group.finish();
}

fn bench_fits(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    let data = sample(6, 8);
    let init = kasa_fit(&data).unwrap();
    let solver_cfg = SolverConfig::default();
    let baseline_cfg = BaselineConfig::default();

    group.bench_function("kasa/n8", |b| {
        b.iter(|| kasa_fit(black_box(&data)).unwrap())
    });
    group.bench_function("new/n8", |b| {
        b.iter(|| fit(black_box(&data), black_box(init.center()), &solver_cfg).unwrap())
    });
    group.bench_function("gn/n8", |b| {
        b.iter(|| gauss_newton_fit(black_box(&data), black_box(&init), &baseline_cfg))
    });
    group.bench_function("lm/n8", |b| {
        b.iter(|| lm_classic_fit(black_box(&data), black_box(&init), &baseline_cfg))
    });
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let data = sample(7, 8);
    let init = kasa_fit(&data).unwrap();
    let seed = fit(&data, init.center(), &SolverConfig::default())
        .unwrap()
        .circle()
        .copied()
        .unwrap();
    c.bench_function("oracle/n8", |b| {
        b.iter_batched(
            || seed,
            |s| oracle_fit(black_box(&data), &s).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_evaluators, bench_fits, bench_oracle);
criterion_main!(benches);
