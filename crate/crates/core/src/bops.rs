//! The bi-orthogonal system {φ_n, φ*_n} and its scalar data.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg;
use crate::moments::{toeplitz_det, toeplitz_matrix, MomentTable};
use crate::poly::{horner, Poly};
use crate::report::{rel, IdentityReport};
use crate::C64;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildMethod {
    #[default]
    GramLu,
    Szego,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BopsLevel {
    pub n: usize,
    pub kappa: C64,
    /// φ_n(z) = Σ c_j z^j
    pub c: Vec<C64>,
    /// φ*_n(z) = Σ cbar_j z^{n−j}
    pub cbar: Vec<C64>,
    pub r: C64,
    pub rbar: C64,
    pub l: C64,
    pub lbar: C64,
    pub m2: Option<C64>,
}

impl BopsLevel {
    fn from_coeffs(n: usize, kappa: C64, c: Vec<C64>, cbar: Vec<C64>) -> Self {
        let sub = |v: &[C64], d: usize| if n >= d { v[n - d] } else { C64::new(0.0, 0.0) };
        BopsLevel {
            n,
            kappa,
            r: c[0] / kappa,
            rbar: cbar[0] / kappa,
            l: sub(&c, 1),
            lbar: sub(&cbar, 1),
            m2: (n >= 2).then(|| c[n - 2]),
            c,
            cbar,
        }
    }

    /// φ_n(0)
    pub fn p(&self) -> C64 {
        self.c[0]
    }

    /// φ̄_n(0)
    pub fn pb(&self) -> C64 {
        self.cbar[0]
    }

    pub fn phi_poly(&self) -> Poly {
        Poly::new(self.c.clone())
    }

    /// φ*_n in ascending form.
    pub fn phis_poly(&self) -> Poly {
        Poly::new(self.cbar.iter().rev().copied().collect())
    }

    /// φ̄_n(z) = Σ cbar_j z^j.
    pub fn phibar(&self, z: C64) -> C64 {
        horner(&self.cbar, z)
    }

    /// The reversal of φ_n, zⁿ φ_n(1/z) = Σ c_j z^{n−j}.
    pub fn phi_rev(&self, z: C64) -> C64 {
        let rev: Vec<C64> = self.c.iter().rev().copied().collect();
        horner(&rev, z)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BopsSystem {
    pub method: BuildMethod,
    pub moments: MomentTable,
    pub levels: Vec<BopsLevel>,
    /// I⁰_0 ..= I⁰_{N+1}
    pub i0: Vec<C64>,
    /// levels whose |I⁰_n| came within a factor 1e3 of the existence floor
    pub existence_log: Vec<usize>,
}

/// Principal root with the tie Re = 0 broken towards Im > 0.
pub fn principal_sqrt(x: C64) -> C64 {
    let s = x.sqrt();
    if s.re == 0.0 && s.im < 0.0 {
        -s
    } else {
        s
    }
}

fn existence_scan(tbl: &MomentTable, top: usize, cfg: &Config) -> Result<(Vec<C64>, Vec<usize>)> {
    let mut i0 = Vec::with_capacity(top + 1);
    let mut log = Vec::new();
    for n in 0..=top {
        let m = toeplitz_matrix(tbl, 0, n);
        let bound = linalg::hadamard_bound(&m);
        let d = linalg::det(m);
        if n > 0 && d.norm() <= cfg.existence_floor * bound {
            return Err(Error::Existence { n, value: d.norm() });
        }
        if n > 0 && d.norm() <= 1e3 * cfg.existence_floor * bound {
            log.push(n);
        }
        i0.push(d);
    }
    Ok((i0, log))
}

fn gram_levels(tbl: &MomentTable, big_n: usize) -> Result<Vec<BopsLevel>> {
    let mut out = Vec::with_capacity(big_n + 1);
    for n in 0..=big_n {
        let t = DMatrix::from_fn(n + 1, n + 1, |j, k| tbl.get(j as i64 - k as i64));
        let mut e = DVector::zeros(n + 1);
        e[n] = C64::new(1.0, 0.0);
        let x = linalg::solve(t.clone(), &e).ok_or(Error::Existence { n: n + 1, value: 0.0 })?;
        let y = linalg::solve(t.transpose(), &e).ok_or(Error::Existence { n: n + 1, value: 0.0 })?;
        let kappa = principal_sqrt(x[n]);
        let c = x.iter().map(|v| v / kappa).collect();
        let cbar = y.iter().map(|v| v / kappa).collect();
        out.push(BopsLevel::from_coeffs(n, kappa, c, cbar));
    }
    Ok(out)
}

fn szego_levels(tbl: &MomentTable, big_n: usize) -> Result<Vec<BopsLevel>> {
    let w0 = tbl.get(0);
    let k0 = principal_sqrt(w0.inv());
    let mut out = vec![BopsLevel::from_coeffs(0, k0, vec![k0], vec![k0])];
    for n in 0..big_n {
        let i0 = toeplitz_det(tbl, 0, n + 1)?.value;
        let sgn = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let r = toeplitz_det(tbl, 1, n + 1)?.value / i0 * sgn;
        let rb = toeplitz_det(tbl, -1, n + 1)?.value / i0 * sgn;
        let cur = &out[n];
        let kn = cur.kappa;
        let kn1 = principal_sqrt(kn * kn / (1.0 - r * rb));
        let (p1, pb1) = (kn1 * r, kn1 * rb);
        let phi = cur.phi_poly();
        let phis = cur.phis_poly();
        let zphi = phi.shift(1);
        let next = (&zphi.scale(kn1) + &phis.scale(p1)).scale(kn.inv());
        let nexts = (&phis.scale(kn1) + &zphi.scale(pb1)).scale(kn.inv());
        let mut c = next.coeffs;
        c.resize(n + 2, C64::new(0.0, 0.0));
        let mut cs = nexts.coeffs;
        cs.resize(n + 2, C64::new(0.0, 0.0));
        let cbar = cs.into_iter().rev().collect();
        out.push(BopsLevel::from_coeffs(n + 1, kn1, c, cbar));
    }
    Ok(out)
}

fn max_dev(a: &[BopsLevel], b: &[BopsLevel]) -> f64 {
    let mut d = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        for (u, v) in x.c.iter().zip(&y.c).chain(x.cbar.iter().zip(&y.cbar)) {
            d = d.max(rel(*u, *v));
        }
    }
    d
}

/// Build levels 0..=N. Needs moments up to |k| = N+1 so that r_{N+1} and the
/// existence check at N+1 are available.
pub fn build_system(tbl: &MomentTable, big_n: usize, method: BuildMethod, cfg: &Config) -> Result<BopsSystem> {
    tbl.require(big_n + 1)?;
    let (i0, existence_log) = existence_scan(tbl, big_n + 1, cfg)?;
    let levels = match method {
        BuildMethod::GramLu => gram_levels(tbl, big_n)?,
        BuildMethod::Szego => szego_levels(tbl, big_n)?,
        BuildMethod::Both => {
            let a = gram_levels(tbl, big_n)?;
            let b = szego_levels(tbl, big_n)?;
            let d = max_dev(&a, &b);
            if d > cfg.method_agreement {
                return Err(Error::MethodDisagreement(d));
            }
            a
        }
    };
    Ok(BopsSystem { method, moments: tbl.clone(), levels, i0, existence_log })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Phi,
    PhiStar,
}

impl BopsSystem {
    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &BopsLevel {
        &self.levels[n]
    }

    pub fn kappa(&self, n: usize) -> C64 {
        self.levels[n].kappa
    }

    pub fn p(&self, n: usize) -> C64 {
        self.levels[n].p()
    }

    pub fn pb(&self, n: usize) -> C64 {
        self.levels[n].pb()
    }

    pub fn eval_poly(&self, n: usize, z: C64, which: Which) -> C64 {
        match which {
            Which::Phi => self.phi(n, z),
            Which::PhiStar => self.phis(n, z),
        }
    }

    pub fn phi(&self, n: usize, z: C64) -> C64 {
        horner(&self.levels[n].c, z)
    }

    pub fn phis(&self, n: usize, z: C64) -> C64 {
        self.levels[n].phi_rev_bar(z)
    }

    pub fn dphi(&self, n: usize, z: C64) -> C64 {
        self.levels[n].phi_poly().deriv().eval(z)
    }

    pub fn dphis(&self, n: usize, z: C64) -> C64 {
        self.levels[n].phis_poly().deriv().eval(z)
    }

    /// Gram matrix Σ_{j,k} c_{m,j} c̄_{n,k} w_{k−j}, which is the pairing of
    /// φ_m against φ̄_n on the circle.
    pub fn gram(&self, m: usize, n: usize) -> C64 {
        let a = &self.levels[m].c;
        let b = &self.levels[n].cbar;
        let mut s = C64::new(0.0, 0.0);
        for (j, &x) in a.iter().enumerate() {
            for (k, &y) in b.iter().enumerate() {
                s += x * y * self.moments.get(k as i64 - j as i64);
            }
        }
        s
    }
}

impl BopsLevel {
    /// φ*_n(z) = Σ cbar_j z^{n−j}.
    pub fn phi_rev_bar(&self, z: C64) -> C64 {
        let rev: Vec<C64> = self.cbar.iter().rev().copied().collect();
        horner(&rev, z)
    }
}

/// Max |⟨φ_m, φ̄_n⟩ − δ_{mn}| over m, n ≤ N, by exact moment sums.
pub fn orthonormality_defect(sys: &BopsSystem) -> f64 {
    let n = sys.max_level();
    let mut d = 0.0f64;
    for a in 0..=n {
        for b in 0..=n {
            let want = if a == b { 1.0 } else { 0.0 };
            d = d.max((sys.gram(a, b) - want).norm());
        }
    }
    d
}

/// Max over n of |⟨φ_n, ζ̄^j⟩| for j < n and |⟨φ*_n, ζ̄^j⟩| for 1 ≤ j ≤ n.
pub fn monomial_orthogonality_defect(sys: &BopsSystem) -> f64 {
    let w = |k: i64| sys.moments.get(k);
    let mut d = 0.0f64;
    for lv in &sys.levels {
        let n = lv.n;
        for j in 0..n {
            let s: C64 = lv.c.iter().enumerate().map(|(i, &x)| x * w(j as i64 - i as i64)).sum();
            d = d.max(s.norm());
        }
        for j in 1..=n {
            let s: C64 = lv.cbar.iter().enumerate().map(|(i, &x)| x * w(j as i64 - (n - i) as i64)).sum();
            d = d.max(s.norm());
        }
    }
    d
}

/// φ_n and φ*_n from the bordered determinants, scaled by κ_n/I⁰_n.
pub fn det_rep_oracle(tbl: &MomentTable, kappa: C64, n: usize, z: C64) -> Result<(C64, C64)> {
    tbl.require(n)?;
    let i0 = toeplitz_det(tbl, 0, n)?.value;
    let a = DMatrix::from_fn(n + 1, n + 1, |i, j| {
        if i < n {
            tbl.get(i as i64 - j as i64)
        } else {
            z.powi(j as i32)
        }
    });
    let b = DMatrix::from_fn(n + 1, n + 1, |i, k| {
        if k < n {
            tbl.get(i as i64 - k as i64)
        } else {
            z.powi((n - i) as i32)
        }
    });
    let s = kappa / i0;
    Ok((linalg::det(a) * s, linalg::det(b) * s))
}

/// φ_n and φ*_n as ratios of Toeplitz determinants of the moment-shifted
/// weights w(ζ)(ζ − z) and w(ζ)(1 − z/ζ).
pub fn integral_rep_oracle(tbl: &MomentTable, kappa: C64, n: usize, z: C64) -> Result<(C64, C64)> {
    tbl.require(n + 1)?;
    let i0 = toeplitz_det(tbl, 0, n)?.value;
    let shifted = |f: &dyn Fn(i64) -> C64| {
        let k = tbl.window as i64 - 1;
        let pairs: Vec<(i64, C64)> = (-k..=k).map(|j| (j, f(j))).collect();
        MomentTable::from_pairs(&pairs, None, crate::moments::MomentSource::ClosedForm)
    };
    let t1 = shifted(&|k| tbl.get(k - 1) - z * tbl.get(k));
    let t2 = shifted(&|k| tbl.get(k) - z * tbl.get(k + 1));
    let sgn = if n % 2 == 0 { 1.0 } else { -1.0 };
    let phi = kappa * toeplitz_det(&t1, 0, n)?.value / i0 * sgn;
    let phis = kappa * toeplitz_det(&t2, 0, n)?.value / i0;
    Ok((phi, phis))
}

/// Residuals of the scalar identity web at the sampled points and pairs.
pub fn verify_scalar_identities(sys: &BopsSystem, zs: &[C64], pairs: &[(C64, C64)], tol: f64) -> IdentityReport {
    let mut rep = IdentityReport::new("bops");
    let top = sys.max_level();
    let k = |n: usize| sys.kappa(n);
    let p = |n: usize| sys.p(n);
    let pb = |n: usize| sys.pb(n);
    for n in 0..top {
        let mut ra = Vec::new();
        let mut rb = Vec::new();
        for &z in zs {
            let lhs = k(n) * sys.phi(n + 1, z);
            let rhs = k(n + 1) * z * sys.phi(n, z) + p(n + 1) * sys.phis(n, z);
            ra.push(rel(lhs, rhs));
            let lhs = k(n) * sys.phis(n + 1, z);
            let rhs = k(n + 1) * sys.phis(n, z) + pb(n + 1) * z * sys.phi(n, z);
            rb.push(rel(lhs, rhs));
        }
        rep.record_max("coupled_recurrence_phi", "bops:coupled-recurrence", Some(n), ra, tol);
        rep.record_max("coupled_recurrence_phistar", "bops:coupled-recurrence", Some(n), rb, tol);
    }
    for n in 1..top {
        let mut ra = Vec::new();
        let mut rb = Vec::new();
        for &z in zs {
            let lhs = k(n) * p(n) * sys.phi(n + 1, z) + k(n - 1) * p(n + 1) * z * sys.phi(n - 1, z);
            let rhs = (k(n) * p(n + 1) + k(n + 1) * p(n) * z) * sys.phi(n, z);
            ra.push(rel(lhs, rhs));
            let lhs = k(n) * pb(n) * sys.phis(n + 1, z) + k(n - 1) * pb(n + 1) * z * sys.phis(n - 1, z);
            let rhs = (k(n) * pb(n + 1) * z + k(n + 1) * pb(n)) * sys.phis(n, z);
            rb.push(rel(lhs, rhs));
        }
        rep.record_max("three_term_phi", "bops:three-term", Some(n), ra, tol);
        rep.record_max("three_term_phistar", "bops:three-term", Some(n), rb, tol);
    }
    for n in 0..top {
        let mut ra = Vec::new();
        let mut rb = Vec::new();
        for &(z, y) in pairs {
            let direct: C64 = (0..=n).map(|j| sys.phi(j, z) * sys.level(j).phibar(y)).sum();
            let one = C64::new(1.0, 0.0);
            let a = (sys.phis(n, z) * sys.level(n).phi_rev(y) - z * y * sys.phi(n, z) * sys.level(n).phibar(y))
                / (one - z * y);
            let b = (sys.phis(n + 1, z) * sys.level(n + 1).phi_rev(y)
                - sys.phi(n + 1, z) * sys.level(n + 1).phibar(y))
                / (one - z * y);
            ra.push(rel(direct, a));
            rb.push(rel(direct, b));
        }
        rep.record_max("christoffel_darboux_n", "bops:christoffel-darboux", Some(n), ra, tol);
        rep.record_max("christoffel_darboux_n1", "bops:christoffel-darboux", Some(n), rb, tol);
    }
    for n in 1..=top {
        let lv = sys.level(n);
        let pr = sys.level(n - 1);
        rep.record(
            "kappa_recursion",
            "bops:leading-coefficients",
            Some(n),
            rel(lv.kappa * lv.kappa, pr.kappa * pr.kappa + lv.p() * lv.pb()),
            tol,
        );
        rep.record(
            "l_recursion",
            "bops:leading-coefficients",
            Some(n),
            rel(lv.l / lv.kappa - pr.l / pr.kappa, lv.r * pr.rbar),
            tol,
        );
        if n >= 2 {
            let pp = sys.level(n - 2);
            let m_prev = pr.m2.unwrap_or_default();
            let lhs = lv.m2.unwrap_or_default() / lv.kappa - m_prev / pr.kappa;
            let rhs = lv.r * (pp.rbar + pr.rbar * pp.l / pp.kappa);
            rep.record(
                "m_recursion",
                "bops:leading-coefficients",
                Some(n),
                rel(lhs, rhs),
                tol,
            );
        }
    }
    for n in 1..sys.i0.len() - 1 {
        if n > top {
            break;
        }
        let lv = sys.level(n);
        let lhs = sys.i0[n + 1] * sys.i0[n - 1] / (sys.i0[n] * sys.i0[n]);
        rep.record("i0_recursion", "bops:toeplitz-recursion", Some(n), rel(lhs, 1.0 - lv.r * lv.rbar), tol);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::MomentSource;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn laurent() -> MomentTable {
        MomentTable::from_pairs(&[(-1, c(1.0)), (0, c(2.0)), (1, c(1.0))], Some(12), MomentSource::ClosedForm)
    }

    #[test]
    fn lebesgue_monomials() {
        let s = build_system(&MomentTable::lebesgue(8), 5, BuildMethod::Both, &Config::default()).unwrap();
        for n in 0..=5 {
            assert_eq!(s.kappa(n), c(1.0));
            assert!((s.phi(n, c(0.5)) - c(0.5f64.powi(n as i32))).norm() < 1e-15);
            assert_eq!(s.phis(n, c(0.0)), s.kappa(n));
        }
    }

    #[test]
    fn laurent_first_level() {
        let s = build_system(&laurent(), 3, BuildMethod::Both, &Config::default()).unwrap();
        let k1 = (2.0f64 / 3.0).sqrt();
        assert!((s.kappa(1) - k1).norm() < 1e-14);
        assert!((s.level(1).r + 0.5).norm() < 1e-14);
        let z = C64::new(0.3, -0.2);
        assert!((s.phi(1, z) - (z - 0.5) * k1).norm() < 1e-14);
        assert!(s.level(0).m2.is_none() && s.level(1).m2.is_none() && s.level(2).m2.is_some());
    }

    #[test]
    fn determinant_routes() {
        let t = laurent();
        let s = build_system(&t, 4, BuildMethod::GramLu, &Config::default()).unwrap();
        for n in 1..=3 {
            for z in [c(1.0), c(2.0), C64::new(0.2, 0.7)] {
                let (a, b) = det_rep_oracle(&t, s.kappa(n), n, z).unwrap();
                let (x, y) = integral_rep_oracle(&t, s.kappa(n), n, z).unwrap();
                assert!(rel(a, s.phi(n, z)) < 1e-12 && rel(b, s.phis(n, z)) < 1e-12);
                assert!(rel(x, s.phi(n, z)) < 1e-12 && rel(y, s.phis(n, z)) < 1e-12);
            }
        }
        assert!(orthonormality_defect(&s) < 1e-12);
        assert!(monomial_orthogonality_defect(&s) < 1e-12);
    }

    #[test]
    fn existence_failure_is_reported() {
        // w = z + 1/z has w_0 = 0, so I⁰_1 = 0
        let t = MomentTable::from_pairs(&[(-1, c(1.0)), (1, c(1.0))], Some(6), MomentSource::ClosedForm);
        assert!(matches!(build_system(&t, 3, BuildMethod::GramLu, &Config::default()), Err(Error::Existence { n: 1, .. })));
    }
}
