//! Coefficient functions Θ_n, Θ*_n, Ω_n, Ω*_n of a semi-classical system and
//! the identities they satisfy.

use crate::assoc::Evaluator;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::moments::UFit;
use crate::poly::{fit_poly, Poly};
use crate::report::{rel, rel_to, IdentityReport};
use crate::samples::jittered_circle;
use crate::weight::{PolyPair, SemiClassicalWeight};
use crate::C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffQuad {
    pub n: usize,
    pub theta: Poly,
    pub thetastar: Poly,
    pub omega: Poly,
    pub omegastar: Poly,
    /// worst relative least-squares residual over the four fits
    pub fit_residual: f64,
    /// worst size of the two surplus coefficients, relative to the fitted ones
    pub degree_excess: f64,
}

impl CoeffQuad {
    pub fn polys(&self) -> [&Poly; 4] {
        [&self.theta, &self.thetastar, &self.omega, &self.omegastar]
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn require_weight(ev: &Evaluator) -> Result<&SemiClassicalWeight> {
    ev.weight
        .as_ref()
        .ok_or_else(|| Error::NotApplicable("coefficient functions need a singularity-form weight".into()))
}

/// Fit the four defining combinations at level n on the sampling circle.
pub fn compute_coeff_quad(ev: &Evaluator, vw: &PolyPair, n: usize, cfg: &Config) -> Result<CoeffQuad> {
    let wt = require_weight(ev)?;
    if wt.singularities.iter().all(|s| s.rho.norm() == 0.0) {
        return Err(Error::NotSemiClassical(f64::INFINITY));
    }
    if n + 1 > ev.max_level() {
        return Err(Error::InsufficientWindow { required: n + 1, available: ev.max_level() });
    }
    let rad = cfg.fit_radius;
    if let Some(s) = wt.singularities.iter().skip(1).find(|s| (s.z.norm() - rad).abs() < 0.1) {
        return Err(Error::Geometry(format!("singularity {} is too close to the fit circle |z| = {rad}", s.z)));
    }
    let s = &ev.sys;
    let pref = s.p(n + 1) / s.kappa(n) * 2.0;
    let prefs = s.pb(n + 1) / s.kappa(n) * 2.0;
    if pref.norm() < 1e-12 {
        return Err(Error::Degenerate { n, what: "phi_{n+1}(0) vanishes".into() });
    }
    if prefs.norm() < 1e-12 {
        return Err(Error::Degenerate { n, what: "conjugate phi_{n+1}(0) vanishes".into() });
    }
    let zs = jittered_circle(rad, cfg.fit_points, cfg.seed);
    let mut vals: [Vec<C64>; 4] = Default::default();
    for &z in &zs {
        let (wz, vz) = (vw.w.eval(z), vw.v.eval(z));
        let (f0, f1, df) = (ev.phi(n, z), ev.phi(n + 1, z), ev.dphi(n, z));
        let (g0, g1, dg) = (ev.phis(n, z), ev.phis(n + 1, z), ev.dphis(n, z));
        let (e0, e1, de) = (ev.eps(n, z)?, ev.eps(n + 1, z)?, ev.deps_exact(n, z)?);
        let (s0, s1, ds) = (ev.epss(n, z)?, ev.epss(n + 1, z)?, ev.depss_exact(n, z)?);
        let zn = z.powi(n as i32);
        vals[0].push((wz * (-f0 * de + e0 * df) + vz * 2.0 * f0 * e0) / (pref * zn));
        vals[1].push((wz * (g0 * ds - s0 * dg) - vz * 2.0 * g0 * s0) / (prefs * zn * z));
        vals[2].push((wz * (e1 * df - f1 * de) + vz * (f0 * e1 + e0 * f1)) / (pref * zn));
        vals[3].push((wz * (-s1 * dg + g1 * ds) - vz * (g0 * s1 + s0 * g1)) / (prefs * zn * z));
    }
    let m = wt.m();
    let degs = [m - 2, m - 2, m - 1, m - 1];
    let mut polys = Vec::with_capacity(4);
    let (mut worst_res, mut worst_ex) = (0.0f64, 0.0f64);
    for (v, &d) in vals.iter().zip(&degs) {
        let (p, res) = fit_poly(&zs, v, d + 2, rad);
        let b: Vec<f64> = (0..=d + 2).map(|k| p.coeff(k).norm() * rad.powi(k as i32)).collect();
        let kept = b[..=d].iter().cloned().fold(0.0, f64::max).max(1e-300);
        let ex = b[d + 1].max(b[d + 2]) / kept;
        worst_res = worst_res.max(res);
        worst_ex = worst_ex.max(ex);
        polys.push(p.truncated(d));
    }
    if worst_res > cfg.fit_residual {
        return Err(Error::NotSemiClassical(worst_res));
    }
    let mut it = polys.into_iter();
    Ok(CoeffQuad {
        n,
        theta: it.next().unwrap(),
        thetastar: it.next().unwrap(),
        omega: it.next().unwrap(),
        omegastar: it.next().unwrap(),
        fit_residual: worst_res,
        degree_excess: worst_ex,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffSet {
    pub weight: SemiClassicalWeight,
    pub vw: PolyPair,
    /// quads for n = 0..=max
    pub quads: Vec<CoeffQuad>,
}

impl CoeffSet {
    pub fn build(ev: &Evaluator, max: usize, cfg: &Config) -> Result<CoeffSet> {
        let weight = require_weight(ev)?.clone();
        let vw = crate::weight::build_vw(&weight);
        let quads = (0..=max).map(|n| compute_coeff_quad(ev, &vw, n, cfg)).collect::<Result<_>>()?;
        Ok(CoeffSet { weight, vw, quads })
    }

    pub fn max(&self) -> usize {
        self.quads.len() - 1
    }

    pub fn th(&self, n: usize, z: C64) -> C64 {
        self.quads[n].theta.eval(z)
    }

    pub fn ths(&self, n: usize, z: C64) -> C64 {
        self.quads[n].thetastar.eval(z)
    }

    pub fn om(&self, n: usize, z: C64) -> C64 {
        self.quads[n].omega.eval(z)
    }

    pub fn oms(&self, n: usize, z: C64) -> C64 {
        self.quads[n].omegastar.eval(z)
    }

    pub fn w(&self, z: C64) -> C64 {
        self.vw.w.eval(z)
    }

    pub fn v(&self, z: C64) -> C64 {
        self.vw.v.eval(z)
    }
}

/// Scalar data of the system in the compact names used by the formulas.
struct Sc<'a>(&'a Evaluator);

impl Sc<'_> {
    fn k(&self, n: usize) -> C64 {
        self.0.sys.kappa(n)
    }
    fn p(&self, n: usize) -> C64 {
        self.0.sys.p(n)
    }
    fn pb(&self, n: usize) -> C64 {
        self.0.sys.pb(n)
    }
    fn l(&self, n: usize) -> C64 {
        self.0.sys.level(n).l
    }
    fn lb(&self, n: usize) -> C64 {
        self.0.sys.level(n).lbar
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub id: String,
    /// 0 Θ, 1 Θ*, 2 Ω, 3 Ω*
    pub which: usize,
    pub power: usize,
    pub value: C64,
}

/// Closed forms for the two leading and the two trailing coefficients of
/// each member of the quad at level n ≥ 1.
pub fn closed_form_coefficients(ev: &Evaluator, set: &CoeffSet, n: usize) -> Vec<ClosedForm> {
    let s = Sc(ev);
    let (k, p, pb, l, lb) = (|j| s.k(j), |j| s.p(j), |j| s.pb(j), |j| s.l(j), |j| s.lb(j));
    let wt = &set.weight;
    let m = wt.m();
    let sr = wt.rho_sum();
    let sz: C64 = wt.locations().iter().sum();
    let srz: C64 = wt.singularities.iter().map(|x| x.rho * x.z).sum();
    let wd = set.vw.w.deriv();
    let (w1, w2) = (wd.eval(c(0.0)), wd.deriv().eval(c(0.0)));
    let (v0, v1) = (set.vw.v.eval(c(0.0)), set.vw.v.deriv().eval(c(0.0)));
    let nf = n as f64;
    let mut out = Vec::new();
    let mut push = |id: &str, which: usize, power: usize, value: C64| {
        out.push(ClosedForm { id: id.into(), which, power, value })
    };
    let k3 = k(n) * k(n) * k(n);
    push("theta_lead", 0, m - 2, (sr + nf + 1.0) * k(n) / k(n + 1));
    push("thetastar_lead", 1, m - 2, -(sr + nf) * pb(n) / pb(n + 1));
    push("omega_lead", 2, m - 1, sr * 0.5 + 1.0);
    push("omegastar_lead", 3, m - 1, -sr * 0.5);
    push("theta_trail", 0, 0, (v0 * 2.0 - w1 * nf) * p(n) / p(n + 1));
    push("thetastar_trail", 1, 0, -(v0 * 2.0 - w1 * (nf + 1.0)) * k(n) / k(n + 1));
    push("omega_trail", 2, 0, v0 - w1 * nf);
    push("omegastar_trail", 3, 0, w1 * (nf + 1.0) - v0);
    if m >= 3 {
        let k1sq = k(n + 1) * k(n + 1);
        push(
            "theta_sublead",
            0,
            m - 3,
            -((sr + nf + 1.0) * sz - srz) * k(n) / k(n + 1)
                + (sr + nf + 2.0) * k3 / (k1sq * k(n + 2)) * p(n + 2) / p(n + 1)
                - (sr + nf) * p(n + 1) * pb(n) / k1sq
                - k(n) * l(n + 1) * 2.0 / k1sq,
        );
        push(
            "thetastar_sublead",
            1,
            m - 3,
            ((sr + nf) * sz - srz) * pb(n) / pb(n + 1) + (sr + nf + 1.0) * (pb(n) / pb(n + 1)) * (l(n + 1) / k(n + 1))
                - (sr + nf - 1.0) * (k(n) * pb(n - 1) + pb(n) * l(n - 1)) / (k(n - 1) * pb(n + 1)),
        );
        push(
            "omega_sublead",
            2,
            m - 2,
            -sr * sz * 0.5 + srz * 0.5 - sz
                + (sr + nf + 2.0) * k(n) * k(n) / (k(n + 2) * k(n + 1)) * p(n + 2) / p(n + 1)
                - l(n + 1) / k(n + 1),
        );
        push(
            "omegastar_sublead",
            3,
            m - 2,
            sr * sz * 0.5 - srz * 0.5 - (sr + nf) * (k(n) / k(n + 1)) * (pb(n) / pb(n + 1)) + l(n + 1) / k(n + 1),
        );
        push(
            "theta_trail1",
            0,
            1,
            (v1 * 2.0 - w2 * 0.5 * nf) * p(n) / p(n + 1)
                + (v0 * 2.0 - w1 * (nf - 1.0)) * k(n) * p(n - 1) / (k(n - 1) * p(n + 1))
                + ((w1 * (nf + 1.0) - v0 * 2.0) * lb(n + 1) / k(n + 1) - (w1 * (nf - 1.0) - v0 * 2.0) * lb(n - 1) / k(n - 1))
                    * p(n)
                    / p(n + 1),
        );
        push(
            "thetastar_trail1",
            1,
            1,
            -(v1 * 2.0 - w2 * 0.5 * (nf + 1.0)) * k(n) / k(n + 1) - (v0 * 2.0 - w1 * nf) * lb(n) / k(n + 1)
                + (w1 * (nf + 2.0) - v0 * 2.0)
                    * (k3 / (k(n + 2) * k1sq) * pb(n + 2) / pb(n + 1) - (k(n) / k(n + 1)) * (lb(n + 1) / k(n + 1))),
        );
    }
    push(
        "omega_trail1",
        2,
        1,
        v1 - w2 * 0.5 * nf
            + (v0 * k(n) / k(n + 1) + (v0 - w1 * nf) * k(n + 1) / k(n)) * p(n) / p(n + 1)
            + (v0 - w1 * nf) * lb(n) / k(n)
            - (v0 - w1 * (nf + 1.0)) * lb(n + 1) / k(n + 1),
    );
    push(
        "omegastar_trail1",
        3,
        1,
        w2 * 0.5 * (nf + 1.0) - v1 + (w1 * (nf + 2.0) - v0 * 2.0) * k(n) * k(n) / (k(n + 2) * k(n + 1)) * pb(n + 2) / pb(n + 1)
            - w1 * lb(n + 1) / k(n + 1),
    );
    out
}

pub fn verify_expansion_closed_forms(ev: &Evaluator, set: &CoeffSet, n: usize, tol: f64) -> IdentityReport {
    let mut rep = IdentityReport::new("coeffs_expansions");
    let q = &set.quads[n];
    let polys = q.polys();
    for cf in closed_form_coefficients(ev, set, n) {
        let got = polys[cf.which].coeff(cf.power);
        rep.record(&cf.id, "coeffs:expansions", Some(n), rel(got, cf.value), tol);
    }
    rep
}

/// Degree certification and Ω_n(0) = V(0) − nW′(0).
pub fn verify_degrees(set: &CoeffSet, tol: f64, fit_tol: f64) -> IdentityReport {
    let mut rep = IdentityReport::new("coeffs_degrees");
    let w1 = set.vw.w.deriv().eval(c(0.0));
    let v0 = set.v(c(0.0));
    for q in &set.quads {
        rep.record("degree_certification", "coeffs:degrees", Some(q.n), q.degree_excess, tol);
        rep.record("fit_residual", "coeffs:degrees", Some(q.n), q.fit_residual, fit_tol);
        rep.record("omega_at_origin", "coeffs:omega-origin", Some(q.n), rel(q.omega.eval(c(0.0)), v0 - w1 * q.n as f64), tol);
    }
    rep
}

/// Linear relations between consecutive quads at sample points z ≠ 0,
/// for a level 1 ≤ n with quads n−1..=n+1 available.
pub fn verify_linear_relations(ev: &Evaluator, set: &CoeffSet, n: usize, zs: &[C64], tol: f64) -> Result<IdentityReport> {
    if n == 0 || n + 1 > set.max() {
        return Err(Error::InsufficientWindow { required: n + 1, available: set.max() });
    }
    let s = Sc(ev);
    let (k, p, pb) = (|j| s.k(j), |j| s.p(j), |j| s.pb(j));
    let nf = n as f64;
    let mut res: Vec<Vec<f64>> = vec![Vec::new(); 11];
    for &z in zs {
        if z.norm() < 1e-8 {
            return Err(Error::Input("linear relations carry W(z)/z; sample at z != 0".into()));
        }
        let (th, ths, om, oms) = (|j| set.th(j, z), |j| set.ths(j, z), |j| set.om(j, z), |j| set.oms(j, z));
        let wz = set.w(z) / z;
        let scale = [om(n), oms(n), th(n) * z, ths(n), wz, th(n + 1) * z, ths(n + 1) * z];
        let e = [
            om(n) + om(n - 1) - (p(n + 1) / p(n) + k(n + 1) / k(n) * z) * th(n) + wz * (nf - 1.0),
            (p(n + 1) / p(n) + k(n + 1) / k(n) * z) * (om(n - 1) - om(n))
                + k(n) * p(n + 2) / (k(n + 1) * p(n + 1)) * z * th(n + 1)
                - k(n - 1) * p(n + 1) / (k(n) * p(n)) * z * th(n - 1)
                - p(n + 1) / p(n) * wz,
            oms(n) + oms(n - 1) - (k(n + 1) / k(n) + pb(n + 1) / pb(n) * z) * ths(n) - wz * nf,
            (k(n + 1) / k(n) + pb(n + 1) / pb(n) * z) * (oms(n - 1) - oms(n))
                + k(n) * pb(n + 2) / (k(n + 1) * pb(n + 1)) * z * ths(n + 1)
                - k(n - 1) * pb(n + 1) / (k(n) * pb(n)) * z * ths(n - 1)
                + k(n + 1) / k(n) * wz,
            om(n + 1) + oms(n) - (p(n + 2) / p(n + 1) + k(n + 2) / k(n + 1) * z) * th(n + 1)
                + k(n + 1) / k(n) * (z * th(n) - ths(n)),
            om(n) - om(n + 1)
                + k(n + 2) / k(n + 1) * (z + pb(n + 1) / k(n + 1) * p(n + 2) / k(n + 2)) * th(n + 1)
                + p(n + 1) * pb(n + 1) / (k(n + 1) * k(n)) * ths(n)
                - k(n + 1) / k(n) * z * th(n)
                - wz,
            oms(n + 1) + om(n) - (k(n + 2) / k(n + 1) + pb(n + 2) / pb(n + 1) * z) * ths(n + 1)
                - k(n + 1) / k(n) * (z * th(n) - ths(n))
                - wz,
            oms(n) - oms(n + 1)
                + k(n + 2) / k(n + 1) * (c(1.0) + p(n + 1) / k(n + 1) * pb(n + 2) / k(n + 2) * z) * ths(n + 1)
                + p(n + 1) * pb(n + 1) / (k(n + 1) * k(n)) * z * th(n)
                - k(n + 1) / k(n) * ths(n),
            p(n + 1) / p(n) * th(n) - k(n) / k(n - 1) * z * th(n - 1)
                - (pb(n + 1) / pb(n) * z * ths(n) - k(n) / k(n - 1) * ths(n - 1)),
            oms(n) - om(n) - (-(k(n + 1) / k(n)) * (z * th(n) - ths(n)) + wz * nf),
            oms(n) + om(n)
                - (k(n) * k(n) / (k(n + 1) * k(n + 1)) * (p(n + 2) / p(n + 1) * th(n + 1) + k(n + 1) / k(n) * ths(n)) + wz),
        ];
        for (r, v) in res.iter_mut().zip(e) {
            r.push(rel_to(v, &scale));
        }
    }
    let ids = [
        "linear_a", "linear_b", "linear_c", "linear_d", "linear_e", "linear_f", "linear_g", "linear_h", "linear_i",
        "linear_j", "linear_k",
    ];
    let mut rep = IdentityReport::new("coeffs_linear");
    for (i, (id, r)) in ids.iter().zip(res).enumerate() {
        let anchor = if i < 8 { "coeffs:linear-relations" } else { "coeffs:additional-identities" };
        rep.record_max(id, anchor, Some(n), r, tol);
    }
    Ok(rep)
}

fn nonzero_singularities(set: &CoeffSet) -> Vec<(usize, C64, C64)> {
    set.weight
        .singularities
        .iter()
        .enumerate()
        .filter(|(_, s)| s.z.norm() > 0.0)
        .map(|(j, s)| (j, s.z, s.rho))
        .collect()
}

/// Bilinear identities and residue formulas at every z_j ≠ 0, level n ≥ 1.
pub fn verify_bilinear(ev: &Evaluator, set: &CoeffSet, n: usize, tol: f64) -> Result<IdentityReport> {
    if n == 0 || n + 1 > set.max() {
        return Err(Error::InsufficientWindow { required: n + 1, available: set.max() });
    }
    let s = Sc(ev);
    let (k, p, pb) = (|j| s.k(j), |j| s.p(j), |j| s.pb(j));
    let mut rep = IdentityReport::new("coeffs_bilinear");
    let mut ot: Vec<Vec<f64>> = vec![Vec::new(); 6];
    let mut br: Vec<Vec<f64>> = vec![Vec::new(); 10];
    for (j, z, _) in nonzero_singularities(set) {
        let v = set.v(z);
        if v.norm() < 1e-14 {
            return Err(Error::SingularResidue(j + 1));
        }
        let (th, ths, om, oms) = (|i| set.th(i, z), |i| set.ths(i, z), |i| set.om(i, z), |i| set.oms(i, z));
        let v2 = v * v;
        let g = k(n) * p(n + 2) / (k(n + 1) * p(n + 1));
        let gs = k(n) * pb(n + 2) / (k(n + 1) * pb(n + 1));
        let ca = k(n - 1) * k(n - 1) / (k(n) * k(n));
        let k3 = k(n) * k(n) * k(n);
        let e1 = p(n + 1) * pb(n + 1) / (k(n) * k(n)) * z * th(n) * ths(n) + v2;
        let pairs = [
            (om(n) * om(n), g * z * th(n) * th(n + 1) + v2),
            (oms(n) * oms(n), gs * z * ths(n) * ths(n + 1) + v2),
            (
                (om(n - 1) - ca * p(n + 1) / p(n) * th(n)).powi(2),
                k(n - 1) * p(n + 1) * pb(n) / k3 * th(n) * ths(n - 1) + v2,
            ),
            (
                (oms(n - 1) - ca * pb(n + 1) / pb(n) * z * ths(n)).powi(2),
                k(n - 1) * pb(n + 1) * p(n) / k3 * z * z * ths(n) * th(n - 1) + v2,
            ),
            (e1, (om(n) - k(n + 1) / k(n) * z * th(n)).powi(2)),
            (e1, (oms(n) - k(n + 1) / k(n) * ths(n)).powi(2)),
        ];
        for (r, (a, b)) in ot.iter_mut().zip(pairs) {
            r.push(rel_to(a - b, &[a, b, v2]));
        }
        let (f0, f1, g0, g1) = (ev.phi(n, z), ev.phi(n + 1, z), ev.phis(n, z), ev.phis(n + 1, z));
        let (e0, en1, s0, s1) = (ev.eps(n, z)?, ev.eps(n + 1, z)?, ev.epss(n, z)?, ev.epss(n + 1, z)?);
        let zn = z.powi(n as i32);
        let a = p(n + 1) / k(n) * zn * 2.0 / (v * 2.0);
        let b = pb(n + 1) / k(n) * zn * z * 2.0 / (v * 2.0);
        let kr = k(n + 1) / k(n);
        let terms = [
            (f0 * e0, a * th(n)),
            (g0 * s0, -b * ths(n)),
            (f1 * e0, a * (om(n) + v)),
            (f0 * en1, a * (om(n) - v)),
            (g0 * s1, -b * (oms(n) + v)),
            (g1 * s0, -b * (oms(n) - v)),
            (f0 * s0, -(zn / v) * (om(n) - v - kr * z * th(n))),
            (f0 * s0, -(zn / v) * (oms(n) - v - kr * ths(n))),
            (g0 * e0, (zn / v) * (om(n) + v - kr * z * th(n))),
            (g0 * e0, (zn / v) * (oms(n) + v - kr * ths(n))),
        ];
        for (r, (x, y)) in br.iter_mut().zip(terms) {
            r.push(rel_to(x - y, &[x, y]));
        }
    }
    for (id, r) in ["bilinear_a", "bilinear_b", "bilinear_c", "bilinear_d", "bilinear_e", "bilinear_f"].iter().zip(ot) {
        rep.record_max(id, "coeffs:bilinear", Some(n), r, tol);
    }
    let ids = ["residue_a", "residue_b", "residue_c", "residue_d", "residue_e", "residue_f", "residue_g", "residue_h", "residue_i", "residue_j"];
    for (id, r) in ids.iter().zip(br) {
        rep.record_max(id, "coeffs:bilinear-residues", Some(n), r, tol);
    }
    Ok(rep)
}

fn poly_defect(a: &Poly, b: &Poly) -> f64 {
    let d = a - b;
    d.max_abs() / a.max_abs().max(b.max_abs()).max(1.0)
}

/// Θ_0, Θ_1, Θ*_0, Θ*_1, Ω_0, Ω*_0 against their expressions in U, compared
/// coefficientwise.
pub fn verify_initial_members(ev: &Evaluator, set: &CoeffSet, u: &UFit, tol: f64) -> IdentityReport {
    let s = Sc(ev);
    let (k0, k1, p1, p2, pb1, pb2) = (s.k(0), s.k(1), s.p(1), s.p(2), s.pb(1), s.pb(2));
    let uu = &u.u;
    let (w, v2) = (&set.vw.w, set.vw.v.scale(c(2.0)));
    let k02 = k0 * k0;
    let minus = &v2 - &uu.scale(k02);
    let plus = &v2 + &uu.scale(k02);
    let q0 = &set.quads[0];
    let q1 = &set.quads[1];
    let mut rep = IdentityReport::new("coeffs_initial");
    let a = "coeffs:initial-members";
    rep.record("initial_theta0", a, Some(0), poly_defect(&q0.theta.scale(p1 / k0 * 2.0), &minus), tol);
    let rhs = &(&(&minus.shift(2).scale(k1 * k1 / k02) - &uu.shift(1).scale(k1 * p1 * 2.0)) - &w.scale(k1 * p1 / k02 * 2.0))
        - &plus.scale(p1 * p1 / k02);
    rep.record("initial_theta1", a, Some(1), poly_defect(&q1.theta.shift(1).scale(p2 / k1 * 2.0), &rhs), tol);
    rep.record("initial_thetastar0", a, Some(0), poly_defect(&q0.thetastar.shift(1).scale(pb1 / k0 * 2.0), &plus.scale(c(-1.0))), tol);
    let rhs = &(&(&minus.shift(2).scale(pb1 * pb1 / k02) - &uu.shift(1).scale(k1 * pb1 * 2.0))
        - &w.scale(k1 * pb1 / k02 * 2.0))
        - &plus.scale(k1 * k1 / k02);
    rep.record("initial_thetastar1", a, Some(1), poly_defect(&q1.thetastar.shift(2).scale(pb2 / k1 * 2.0), &rhs), tol);
    let rhs = &minus.shift(1).scale(k1) - &uu.scale(k02 * p1);
    rep.record("initial_omega0", a, Some(0), poly_defect(&q0.omega.scale(p1 * 2.0), &rhs), tol);
    let rhs = &plus.scale(-k1) - &uu.shift(1).scale(k02 * pb1);
    rep.record("initial_omegastar0", a, Some(0), poly_defect(&q0.omegastar.shift(1).scale(pb1 * 2.0), &rhs), tol);
    rep
}

/// D_n = Ω_n² − g_n zΘ_nΘ_{n+1} at each z_j ≠ 0. D_0 is formed from the
/// initial members in U and the differences D_k − D_{k−1} from the fitted
/// quads; every partial sum must equal V(z_j)².
pub fn verify_telescoping(ev: &Evaluator, set: &CoeffSet, u: &UFit, upto: usize, tol: f64) -> Result<IdentityReport> {
    if upto + 1 > set.max() {
        return Err(Error::InsufficientWindow { required: upto + 1, available: set.max() });
    }
    let s = Sc(ev);
    let (k, p) = (|j| s.k(j), |j| s.p(j));
    let g = |n: usize| k(n) * p(n + 2) / (k(n + 1) * p(n + 1));
    let d = |n: usize, z: C64| set.om(n, z).powi(2) - g(n) * z * set.th(n, z) * set.th(n + 1, z);
    let k0 = k(0);
    let mut rep = IdentityReport::new("coeffs_telescoping");
    for (_, z, _) in nonzero_singularities(set) {
        let (uz, vz, wz) = (u.u.eval(z), set.v(z), set.w(z));
        let minus = vz * 2.0 - k0 * k0 * uz;
        let plus = vz * 2.0 + k0 * k0 * uz;
        let th0 = minus / (p(1) / k0 * 2.0);
        let th1 = (k(1) * k(1) / (k0 * k0) * z * z * minus - k(1) * p(1) * z * uz * 2.0 - k(1) * p(1) / (k0 * k0) * wz * 2.0
            - p(1) * p(1) / (k0 * k0) * plus)
            / (p(2) / k(1) * z * 2.0);
        let om0 = (k(1) * z * minus - k0 * k0 * p(1) * uz) / (p(1) * 2.0);
        let mut acc = om0 * om0 - g(0) * z * th0 * th1;
        let v2 = vz * vz;
        let mut r = vec![rel_to(acc - v2, &[v2])];
        for n in 1..=upto {
            acc += d(n, z) - d(n - 1, z);
            r.push(rel_to(acc - v2, &[v2]));
        }
        rep.record_max("telescoping_sum", "coeffs:telescoping", Some(upto), r, tol);
    }
    Ok(rep)
}

/// W·(derivative) against the coefficient-function right sides, ε′ by
/// plain central differences.
pub fn spectral_derivative_check(ev: &Evaluator, set: &CoeffSet, n: usize, zs: &[C64], h: f64, tol: f64) -> Result<IdentityReport> {
    if n + 1 > ev.max_level() || n > set.max() {
        return Err(Error::InsufficientWindow { required: n + 1, available: set.max() });
    }
    let sp = ev.sys.p(n + 1);
    if sp.norm() < 1e-12 {
        return Err(Error::Degenerate { n, what: "phi_{n+1}(0) vanishes".into() });
    }
    let mut r: Vec<Vec<f64>> = vec![Vec::new(); 4];
    for &z in zs {
        if set.weight.locations().iter().any(|&a| (a - z).norm() < 1e-6) {
            return Err(Error::Input(format!("sample {z} sits on a singularity")));
        }
        let (wz, vz) = (set.w(z), set.v(z));
        let (th, ths, om, oms) = (set.th(n, z), set.ths(n, z), set.om(n, z), set.oms(n, z));
        let de = crate::assoc::central(|x| ev.eps_on(n, x, crate::assoc::Side::of(z)), z, h);
        let ds = crate::assoc::central(|x| ev.epss_on(n, x, crate::assoc::Side::of(z)), z, h);
        let (f0, f1, g0, g1) = (ev.phi(n, z), ev.phi(n + 1, z), ev.phis(n, z), ev.phis(n + 1, z));
        let (e0, e1, s0, s1) = (ev.eps(n, z)?, ev.eps(n + 1, z)?, ev.epss(n, z)?, ev.epss(n + 1, z)?);
        let pairs = [
            (wz * ev.dphi(n, z), th * f1 - (om + vz) * f0),
            (wz * ev.dphis(n, z), -ths * g1 + (oms - vz) * g0),
            (wz * de, th * e1 - (om - vz) * e0),
            (wz * ds, -ths * s1 + (oms + vz) * s0),
        ];
        for (rr, (a, b)) in r.iter_mut().zip(pairs) {
            rr.push(rel_to(a - b, &[a, b]));
        }
    }
    let mut rep = IdentityReport::new("coeffs_spectral");
    for (id, rr) in ["spectral_phi", "spectral_phistar", "spectral_eps", "spectral_epsstar"].iter().zip(r) {
        rep.record_max(id, "coeffs:spectral-derivatives", Some(n), rr, tol);
    }
    Ok(rep)
}

/// Ratio of zΘ_nΘ_{n+1} at two singularities against (Ω_n−V)(Ω_n+V).
pub fn dpainleve_ratio_check(ev: &Evaluator, set: &CoeffSet, n: usize, a: usize, b: usize, tol: f64) -> Result<IdentityReport> {
    let _ = ev;
    let nz = nonzero_singularities(set);
    if nz.len() < 2 {
        return Err(Error::NotApplicable("ratio check needs two non-zero singularities".into()));
    }
    if a == b {
        return Err(Error::Input("ratio check needs two distinct singularities".into()));
    }
    let za = set.weight.singularities.get(a).map(|s| s.z).ok_or_else(|| Error::Input(format!("no singularity {a}")))?;
    let zb = set.weight.singularities.get(b).map(|s| s.z).ok_or_else(|| Error::Input(format!("no singularity {b}")))?;
    if za.norm() == 0.0 || zb.norm() == 0.0 {
        return Err(Error::Input("ratio check needs non-zero singularities".into()));
    }
    let side = |z: C64| {
        let v = set.v(z);
        (z * set.th(n, z) * set.th(n + 1, z), (set.om(n, z) - v) * (set.om(n, z) + v))
    };
    let (la, ra) = side(za);
    let (lb, rb) = side(zb);
    if lb.norm() < 1e-300 || rb.norm() < 1e-300 {
        return Err(Error::Degenerate { n, what: "vanishing ratio denominator".into() });
    }
    let mut rep = IdentityReport::new("coeffs_dpainleve");
    rep.record("dpainleve_ratio", "coeffs:ratio", Some(n), rel(la / lb, ra / rb), tol);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bops::{build_system, BuildMethod};
    use crate::moments::weight_moments;
    use crate::weight::Singularity;

    #[test]
    fn m2_weight_degrees() {
        let cfg = Config::default();
        let w = SemiClassicalWeight::new(vec![Singularity::real(0.0, -1.0), Singularity::real(-1.0, 2.0)], false);
        let t = weight_moments(&w, 32, &cfg).unwrap();
        let sys = build_system(&t, 5, BuildMethod::GramLu, &cfg).unwrap();
        let ev = Evaluator::new(sys, Some(w), &cfg).unwrap();
        let set = CoeffSet::build(&ev, 3, &cfg).unwrap();
        for q in &set.quads {
            assert_eq!(q.theta.degree(), 0);
            assert_eq!(q.omega.degree(), 1);
            assert!(q.degree_excess < 1e-7, "excess {}", q.degree_excess);
        }
    }

    #[test]
    fn lebesgue_refused() {
        let cfg = Config::default();
        let w = SemiClassicalWeight::new(vec![Singularity::real(0.0, 0.0), Singularity::real(3.0, 0.0)], false);
        let sys = build_system(&crate::moments::MomentTable::lebesgue(8), 4, BuildMethod::GramLu, &cfg).unwrap();
        let ev = Evaluator::new(sys, Some(w.clone()), &cfg).unwrap();
        let vw = crate::weight::build_vw(&w);
        assert!(matches!(compute_coeff_quad(&ev, &vw, 1, &cfg), Err(Error::NotSemiClassical(_))));
    }
}
