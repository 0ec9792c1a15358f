//! Seeded sample-point draws. All randomness in the crate flows through here.

use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` points on |z| = radius, one per angular cell with a jittered
/// position inside the cell.
pub fn jittered_circle(radius: f64, count: usize, seed: u64) -> Vec<C64> {
    let mut g = rng(seed);
    (0..count)
        .map(|k| {
            let u: f64 = g.random_range(0.2..0.8);
            C64::from_polar(radius, 2.0 * PI * (k as f64 + u) / count as f64)
        })
        .collect()
}

/// Points in the annulus (r_in, r_out) keeping clear of the unit circle by
/// `gap` and of every point in `avoid` by `gap`.
pub fn annulus_points(r_in: f64, r_out: f64, count: usize, gap: f64, avoid: &[C64], seed: u64) -> Vec<C64> {
    let mut g = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut guard = 0usize;
    while out.len() < count {
        guard += 1;
        assert!(guard < 100_000, "annulus sampling cannot satisfy the exclusions");
        let r = g.random_range(r_in..r_out);
        let th = g.random_range(-PI..PI);
        let z = C64::from_polar(r, th);
        if (r - 1.0).abs() < gap || avoid.iter().any(|&a| (z - a).norm() < gap) {
            continue;
        }
        out.push(z);
    }
    out
}

/// Pairs (z, y) with z·y away from 1, for two-point identities.
pub fn point_pairs(r_in: f64, r_out: f64, count: usize, seed: u64) -> Vec<(C64, C64)> {
    let mut g = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = C64::from_polar(g.random_range(r_in..r_out), g.random_range(-PI..PI));
        let b = C64::from_polar(g.random_range(r_in..r_out), g.random_range(-PI..PI));
        if (C64::new(1.0, 0.0) - a * b).norm() > 0.05 {
            out.push((a, b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(jittered_circle(0.5, 8, 3), jittered_circle(0.5, 8, 3));
        assert_ne!(jittered_circle(0.5, 8, 3), jittered_circle(0.5, 8, 4));
    }
}
