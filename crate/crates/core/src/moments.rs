//! Trigonometric moments, Toeplitz determinants, the Carathéodory function F
//! and the polynomial U = W F' − 2V F.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{fit_poly, Poly};
use crate::quadrature::{circle_nodes, dft_mean};
use crate::samples::jittered_circle;
use crate::weight::{PolyPair, SemiClassicalWeight};
use crate::C64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentSource {
    Quadrature { points: usize, tolerance: f64 },
    UserSupplied,
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub window: usize,
    /// w_k for k = −window..=window
    pub values: Vec<C64>,
    pub source: MomentSource,
}

impl MomentTable {
    /// Moments of a Laurent polynomial Σ a_k z^k given as (k, a_k) pairs.
    /// The window is the larger of `window` and the largest |k| present.
    pub fn from_pairs(pairs: &[(i64, C64)], window: Option<usize>, source: MomentSource) -> Self {
        let kmax = pairs.iter().map(|&(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let k = window.unwrap_or(0).max(kmax);
        let mut values = vec![C64::new(0.0, 0.0); 2 * k + 1];
        for &(j, a) in pairs {
            values[(j + k as i64) as usize] += a;
        }
        MomentTable { window: k, values, source }
    }

    pub fn lebesgue(window: usize) -> Self {
        MomentTable::from_pairs(&[(0, C64::new(1.0, 0.0))], Some(window), MomentSource::ClosedForm)
    }

    /// w_k, zero outside the stored window.
    pub fn get(&self, k: i64) -> C64 {
        let kk = self.window as i64;
        if k.abs() > kk {
            C64::new(0.0, 0.0)
        } else {
            self.values[(k + kk) as usize]
        }
    }

    pub fn require(&self, k: usize) -> Result<()> {
        if self.window < k {
            return Err(Error::InsufficientWindow { required: k, available: self.window });
        }
        Ok(())
    }

    /// True when the table is the complete list of Laurent coefficients of w.
    pub fn is_exact(&self) -> bool {
        !matches!(self.source, MomentSource::Quadrature { .. })
    }

    /// w(z) = Σ w_k z^k; only meaningful for exact tables.
    pub fn laurent_eval(&self, z: C64) -> C64 {
        let k = self.window as i64;
        (-k..=k).map(|j| self.get(j) * z.powi(j as i32)).sum()
    }
}

fn next_pow2(x: usize) -> usize {
    x.next_power_of_two()
}

/// Adaptive trapezoidal moments of a function on the unit circle.
pub fn compute_moments<F>(w: F, window: usize, cfg: &Config) -> Result<MomentTable>
where
    F: Fn(C64) -> Result<C64>,
{
    let mut p = cfg.quad_start.max(next_pow2(4 * (window + 1)));
    let sample = |p: usize| -> Result<(Vec<C64>, f64)> {
        let mut v = Vec::with_capacity(p);
        let mut sup = 0.0f64;
        for z in circle_nodes(1.0, p, 0.0) {
            let x = w(z)?;
            sup = sup.max(x.norm());
            v.push(x);
        }
        Ok((dft_mean(&v), sup))
    };
    let pick = |raw: &[C64]| -> Vec<C64> {
        let p = raw.len() as i64;
        (-(window as i64)..=window as i64).map(|k| raw[k.rem_euclid(p) as usize]).collect()
    };
    let (raw, _) = sample(p)?;
    let mut prev = pick(&raw);
    loop {
        let q = 2 * p;
        let (raw, sup) = sample(q)?;
        let cur = pick(&raw);
        let change = prev.iter().zip(&cur).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if change <= cfg.quad_tol * sup.max(1.0) {
            return Ok(MomentTable {
                window,
                values: cur,
                source: MomentSource::Quadrature { points: q, tolerance: cfg.quad_tol },
            });
        }
        if q >= cfg.quad_cap {
            return Err(Error::QuadratureNonConvergence { points: q, residual: change });
        }
        p = q;
        prev = cur;
    }
}

pub fn weight_moments(w: &SemiClassicalWeight, window: usize, cfg: &Config) -> Result<MomentTable> {
    compute_moments(|z| w.eval(z), window, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzValue {
    pub epsilon: i32,
    pub n: usize,
    pub value: C64,
}

/// [w_{−ε+j−k}], 0 ≤ j,k < n.
pub fn toeplitz_matrix(tbl: &MomentTable, epsilon: i32, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |j, k| tbl.get(-(epsilon as i64) + j as i64 - k as i64))
}

pub fn toeplitz_det(tbl: &MomentTable, epsilon: i32, n: usize) -> Result<ToeplitzValue> {
    if n > 0 {
        tbl.require(n - 1 + epsilon.unsigned_abs() as usize)?;
    }
    let value = linalg::det(toeplitz_matrix(tbl, epsilon, n));
    Ok(ToeplitzValue { epsilon, n, value })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Inside,
    Outside,
}

impl Side {
    pub fn of(z: C64) -> Side {
        if z.norm() < 1.0 {
            Side::Inside
        } else {
            Side::Outside
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaratheodoryEval {
    pub z: C64,
    pub value: C64,
    pub side: Side,
    /// magnitude of the last retained series term
    pub tail: f64,
}

/// Series for F on an explicit side, no exclusion zone.
pub fn caratheodory_on(tbl: &MomentTable, z: C64, side: Side) -> CaratheodoryEval {
    let k = tbl.window;
    let (mut acc, x, sign) = match side {
        Side::Inside => (C64::new(0.0, 0.0), z, 1i64),
        Side::Outside => (C64::new(0.0, 0.0), z.inv(), -1i64),
    };
    // Horner on Σ_{k≥1} w_{±k} x^k
    for j in (1..=k as i64).rev() {
        acc = (acc + tbl.get(sign * j)) * x;
    }
    let lead = tbl.get(0) + acc * 2.0;
    let tail = (tbl.get(sign * k as i64) * x.powi(k as i32)).norm() * 2.0;
    let value = if side == Side::Inside { lead } else { -lead };
    CaratheodoryEval { z, value, side, tail }
}

/// F′(z) from the same truncated series as [`caratheodory_on`].
pub fn caratheodory_deriv_on(tbl: &MomentTable, z: C64, side: Side) -> C64 {
    let k = tbl.window as i64;
    let mut acc = C64::new(0.0, 0.0);
    match side {
        Side::Inside => {
            for j in (1..=k).rev() {
                acc = acc * z + tbl.get(j) * j as f64;
            }
            acc * 2.0
        }
        Side::Outside => {
            let x = z.inv();
            for j in (1..=k).rev() {
                acc = acc * x + tbl.get(-j) * j as f64;
            }
            acc * x * x * 2.0
        }
    }
}

/// F(z) with the side chosen by |z|; refuses the near-circle zone.
pub fn caratheodory_eval(tbl: &MomentTable, z: C64, cfg: &Config) -> Result<CaratheodoryEval> {
    if (z.norm() - 1.0).abs() < cfg.near_circle {
        return Err(Error::NearCircle(z.norm()));
    }
    Ok(caratheodory_on(tbl, z, Side::of(z)))
}

/// Mean over 𝕋 of (ζ+z)/(ζ−z) g(ζ), trapezoid doubled until it settles.
pub fn kernel_mean<G>(g: G, z: C64, cfg: &Config) -> Result<C64>
where
    G: Fn(C64) -> Result<C64>,
{
    if (z.norm() - 1.0).abs() < cfg.near_circle {
        return Err(Error::NearCircle(z.norm()));
    }
    let est = |p: usize| -> Result<(C64, f64)> {
        let mut s = C64::new(0.0, 0.0);
        let mut sup = 0.0f64;
        for t in circle_nodes(1.0, p, 0.0) {
            let v = (t + z) / (t - z) * g(t)?;
            sup = sup.max(v.norm());
            s += v;
        }
        Ok((s / p as f64, sup))
    };
    let mut p = cfg.quad_start;
    let mut prev = est(p)?.0;
    loop {
        p *= 2;
        let (cur, sup) = est(p)?;
        let d = (cur - prev).norm();
        if d <= cfg.quad_tol * sup.max(1.0) {
            return Ok(cur);
        }
        if p >= cfg.quad_cap {
            return Err(Error::QuadratureNonConvergence { points: p, residual: d });
        }
        prev = cur;
    }
}

/// F(z) by direct contour quadrature of its defining integral.
pub fn caratheodory_direct<F>(w: F, z: C64, cfg: &Config) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    kernel_mean(w, z, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UFit {
    pub radius: f64,
    pub u: Poly,
    pub residual: f64,
}

/// Fit U = W F' − 2V F on |z| = radius to a polynomial of degree m−1.
pub fn recover_u(vw: &PolyPair, tbl: &MomentTable, radius: f64, cfg: &Config) -> Result<UFit> {
    let m = vw.w.degree();
    let count = cfg.fit_points.max(2 * m + 2);
    let zs = jittered_circle(radius, count, cfg.seed);
    let mut vals = Vec::with_capacity(count);
    for &z in &zs {
        let h = cfg.fd_step * (1.0 + z.norm());
        let side = Side::of(z);
        let f = |x: C64| caratheodory_on(tbl, x, side).value;
        let df = (f(z + h) - f(z - h)) / (2.0 * h);
        vals.push(vw.w.eval(z) * df - vw.v.eval(z) * 2.0 * f(z));
    }
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (u, residual) = fit_poly(&zs, &vals, m.saturating_sub(1), radius);
    // U ≡ 0 happens for constant weights; judge the residual absolutely then
    let residual = if scale < 1e-12 { scale } else { residual };
    if residual > cfg.fit_residual {
        return Err(Error::NotSemiClassical(residual));
    }
    Ok(UFit { radius, u, residual })
}

/// Tensor-product trapezoid for the N-fold unitary-group average
/// (1/N!) ⟨∏ w(ζ_l) ∏_{j<k} |ζ_k − ζ_j|²⟩ with `p` nodes per angle.
pub fn heine_oracle<F>(w: F, n: usize, p: usize) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    if !(1..=3).contains(&n) {
        return Err(Error::Input(format!("heine oracle supports N in 1..=3, got {n}")));
    }
    let nodes = circle_nodes(1.0, p, 0.5);
    let wv: Vec<C64> = nodes.iter().map(|&z| w(z)).collect::<Result<_>>()?;
    let d2 = |a: usize, b: usize| (nodes[a] - nodes[b]).norm_sqr();
    let mut s = C64::new(0.0, 0.0);
    match n {
        1 => s = wv.iter().sum(),
        2 => {
            for a in 0..p {
                for b in 0..p {
                    s += wv[a] * wv[b] * d2(a, b);
                }
            }
        }
        _ => {
            for a in 0..p {
                for b in 0..p {
                    let ab = wv[a] * wv[b] * d2(a, b);
                    for c in 0..p {
                        s += ab * wv[c] * (d2(a, c) * d2(b, c));
                    }
                }
            }
        }
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    Ok(s / ((p as f64).powi(n as i32) * fact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::{build_vw, Singularity};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn laurent() -> MomentTable {
        MomentTable::from_pairs(&[(-1, c(1.0)), (0, c(2.0)), (1, c(1.0))], Some(12), MomentSource::ClosedForm)
    }

    #[test]
    fn quadrature_reproduces_laurent_moments() {
        let w = SemiClassicalWeight::new(vec![Singularity::real(0.0, -1.0), Singularity::real(-1.0, 2.0)], false);
        let t = weight_moments(&w, 3, &Config::default()).unwrap();
        for k in -3..=3 {
            let want = match k {
                -1 | 1 => 1.0,
                0 => 2.0,
                _ => 0.0,
            };
            assert!((t.get(k) - want).norm() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn toeplitz_examples() {
        let t = laurent();
        assert!((toeplitz_det(&t, 0, 3).unwrap().value - 4.0).norm() < 1e-13);
        assert!((toeplitz_det(&t, 1, 3).unwrap().value - 1.0).norm() < 1e-13);
        assert_eq!(toeplitz_det(&t, 0, 0).unwrap().value, c(1.0));
        let small = MomentTable::lebesgue(2);
        assert!(matches!(toeplitz_det(&small, 1, 4), Err(Error::InsufficientWindow { required: 4, .. })));
    }

    #[test]
    fn caratheodory_examples() {
        let cfg = Config::default();
        let one = MomentTable::lebesgue(4);
        assert_eq!(caratheodory_eval(&one, c(0.3), &cfg).unwrap().value, c(1.0));
        assert_eq!(caratheodory_eval(&one, c(2.0), &cfg).unwrap().value, c(-1.0));
        assert!((caratheodory_eval(&laurent(), c(0.5), &cfg).unwrap().value - 3.0).norm() < 1e-15);
        assert!(matches!(caratheodory_eval(&one, c(1.0005), &cfg), Err(Error::NearCircle(_))));
    }

    #[test]
    fn u_vanishes_for_lebesgue() {
        let w = SemiClassicalWeight::new(vec![Singularity::real(0.0, 0.0), Singularity::real(3.0, 0.0)], false);
        let fit = recover_u(&build_vw(&w), &MomentTable::lebesgue(8), 0.5, &Config::default()).unwrap();
        assert!(fit.u.max_abs() < 1e-12);
    }

    #[test]
    fn heine_lebesgue_and_laurent() {
        let one = |_z: C64| Ok(c(1.0));
        assert!((heine_oracle(one, 2, 16).unwrap() - 1.0).norm() < 1e-13);
        let lw = |z: C64| Ok((z + 1.0) * (z + 1.0) / z);
        assert!((heine_oracle(lw, 2, 16).unwrap() - 3.0).norm() < 1e-12);
    }
}
