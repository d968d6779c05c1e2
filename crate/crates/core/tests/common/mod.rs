#![allow(dead_code)] // each test target compiles its own copy

use circlefit::{normalize, NormalizedPointSet, PointSet, Vec2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Normalized sample of `n` points uniform in [-1, 1]^2.
pub fn random_sample(rng: &mut ChaCha8Rng, n: usize) -> NormalizedPointSet {
    loop {
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if let Ok(data) = normalize(&PointSet::from_xy(&pts).unwrap()) {
            return data;
        }
    }
}

/// Random center with norm in [lo, hi].
pub fn random_center(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec2 {
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let radius = rng.random_range(lo..hi);
    Vec2::new(radius * angle.cos(), radius * angle.sin())
}

pub fn rel_scalar(a: f64, reference: f64) -> f64 {
    (a - reference).abs() / reference.abs().max(1.0)
}

pub fn rel_vec(a: Vec2, reference: Vec2) -> f64 {
    (a - reference).norm() / reference.norm().max(1.0)
}
