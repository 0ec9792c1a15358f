//! Uniform-grid trapezoidal rules on circles.

use crate::C64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Nodes r·e^{iθ_k}, θ_k = 2π(k + offset)/p.
pub fn circle_nodes(radius: f64, p: usize, offset: f64) -> Vec<C64> {
    (0..p)
        .map(|k| C64::from_polar(radius, 2.0 * PI * (k as f64 + offset) / p as f64))
        .collect()
}

/// Forward DFT scaled by 1/p: out[k] = mean_j x_j e^{-2πi jk/p}.
pub fn dft_mean(samples: &[C64]) -> Vec<C64> {
    let p = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(p).process(&mut buf);
    let s = 1.0 / p as f64;
    buf.iter_mut().for_each(|x| *x *= s);
    buf
}

/// Laurent coefficients of f on |z| = radius from `p` equispaced samples.
/// Returns a closure-free table: coefficient of z^j for j in -p/2..p/2.
pub struct LaurentTable {
    pub radius: f64,
    raw: Vec<C64>,
}

impl LaurentTable {
    pub fn from_fn<F: FnMut(C64) -> C64>(mut f: F, radius: f64, p: usize) -> Self {
        let v: Vec<C64> = circle_nodes(radius, p, 0.0).into_iter().map(&mut f).collect();
        LaurentTable { radius, raw: dft_mean(&v) }
    }

    pub fn try_from_fn<F: FnMut(C64) -> crate::Result<C64>>(
        mut f: F,
        radius: f64,
        p: usize,
    ) -> crate::Result<Self> {
        let mut v = Vec::with_capacity(p);
        for z in circle_nodes(radius, p, 0.0) {
            v.push(f(z)?);
        }
        Ok(LaurentTable { radius, raw: dft_mean(&v) })
    }

    pub fn coeff(&self, j: i64) -> C64 {
        let p = self.raw.len() as i64;
        self.raw[j.rem_euclid(p) as usize] / self.radius.powi(j as i32)
    }

    /// |c_j| r^j, the contribution of the j-th term on the sampling circle.
    pub fn weight_on_circle(&self, j: i64) -> f64 {
        let p = self.raw.len() as i64;
        self.raw[j.rem_euclid(p) as usize].norm()
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laurent_of_rational() {
        // f = z^2 + 3/z on r = 2
        let t = LaurentTable::from_fn(|z| z * z + 3.0 / z, 2.0, 32);
        assert!((t.coeff(2) - 1.0).norm() < 1e-13);
        assert!((t.coeff(-1) - 3.0).norm() < 1e-13);
        assert!(t.coeff(0).norm() < 1e-13);
    }
}
