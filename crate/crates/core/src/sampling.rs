//! Seeded sample points on `W = ℂⁿ \ {0}`.
//!
//! Points are drawn in the annulus `0.5 ≤ |z| ≤ 2` (uniform direction,
//! uniform radius) so that no catalog denominator vanishes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::expr::C64;

pub const ANNULUS_INNER: f64 = 0.5;
pub const ANNULUS_OUTER: f64 = 2.0;

fn direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// `count` points with `ANNULUS_INNER ≤ |z| ≤ ANNULUS_OUTER`.
pub fn annulus_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = direction(&mut rng, dim);
            let r = rng.random_range(ANNULUS_INNER..=ANNULUS_OUTER);
            u.into_iter().map(|z| z * r).collect()
        })
        .collect()
}

/// `count` points on the sphere `|z| = radius`.
pub fn sphere_points(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            direction(&mut rng, dim)
                .into_iter()
                .map(|z| z * radius)
                .collect()
        })
        .collect()
}

/// Euclidean norm of a point.
pub fn norm(p: &[C64]) -> f64 {
    p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
