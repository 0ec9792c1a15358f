//! Dense complex polynomials in ascending-coefficient form.

use crate::C64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub coeffs: Vec<C64>,
}

pub fn horner(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

impl Poly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Poly { coeffs }
    }

    pub fn constant(a: C64) -> Self {
        Poly { coeffs: vec![a] }
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); k + 1];
        c[k] = C64::new(1.0, 0.0);
        Poly { coeffs: c }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut p = Poly::constant(C64::new(1.0, 0.0));
        for &r in roots {
            p = &p * &Poly::new(vec![-r, C64::new(1.0, 0.0)]);
        }
        p
    }

    pub fn eval(&self, z: C64) -> C64 {
        horner(&self.coeffs, z)
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Nominal degree (length minus one); trailing zeros are not stripped.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn deriv(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(C64::new(0.0, 0.0));
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| a * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| a * s).collect())
    }

    /// Multiply by z^k.
    pub fn shift(&self, k: usize) -> Poly {
        let mut c = vec![C64::new(0.0, 0.0); k];
        c.extend_from_slice(&self.coeffs);
        Poly::new(c)
    }

    pub fn truncated(&self, deg: usize) -> Poly {
        Poly::new(self.coeffs.iter().take(deg + 1).copied().collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Poly::default();
        }
        let mut c = vec![C64::new(0.0, 0.0); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

/// Least-squares polynomial fit of degree `deg` to samples, done in the scaled
/// variable u = z/scale so the Vandermonde matrix stays well conditioned on a
/// circle of radius `scale`. Returns the polynomial in z and the relative
/// residual ‖Ab − v‖/‖v‖.
pub fn fit_poly(z: &[C64], vals: &[C64], deg: usize, scale: f64) -> (Poly, f64) {
    let cols = deg + 1;
    let a = nalgebra::DMatrix::from_fn(z.len(), cols, |p, k| (z[p] / scale).powi(k as i32));
    let b = nalgebra::DVector::from_column_slice(vals);
    let x = crate::linalg::lstsq(&a, &b);
    let r = &a * &x - &b;
    let denom = b.norm().max(f64::MIN_POSITIVE);
    let coeffs = (0..cols).map(|k| x[k] / scale.powi(k as i32)).collect();
    (Poly::new(coeffs), r.norm() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn roots_and_eval() {
        let p = Poly::from_roots(&[c(0.0), c(-1.0)]);
        assert_eq!(p.coeffs, vec![c(0.0), c(1.0), c(1.0)]);
        assert!((p.eval(c(2.0)) - c(6.0)).norm() < 1e-15);
        assert_eq!(p.deriv().coeffs, vec![c(1.0), c(2.0)]);
    }

    #[test]
    fn fit_recovers_cubic() {
        let p = Poly::new(vec![c(1.0), C64::new(0.5, -2.0), c(0.0), c(3.0)]);
        let z: Vec<C64> = (0..12)
            .map(|k| C64::from_polar(0.5, 0.3 + k as f64 * 0.5))
            .collect();
        let v: Vec<C64> = z.iter().map(|&x| p.eval(x)).collect();
        let (q, res) = fit_poly(&z, &v, 5, 0.5);
        assert!(res < 1e-13, "res {res}");
        for k in 0..6 {
            assert!((q.coeff(k) - p.coeff(k)).norm() < 1e-11, "k={k}");
        }
    }
}
