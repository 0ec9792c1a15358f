//! Associated polynomials ψ_n, ψ*_n and the functions ε_n = ψ_n + Fφ_n,
//! ε*_n = ψ*_n − Fφ*_n.

use crate::bops::BopsSystem;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::moments::{caratheodory_deriv_on, caratheodory_on, kernel_mean, MomentTable};
pub use crate::moments::Side;
use crate::poly::Poly;
use crate::quadrature::LaurentTable;
use crate::report::{rel, rel_to, IdentityReport};
use crate::weight::SemiClassicalWeight;
use crate::C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssocLevel {
    pub n: usize,
    pub psi: Poly,
    pub psistar: Poly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssocSet {
    pub levels: Vec<AssocLevel>,
}

/// ψ_n, ψ*_n by integrating the difference kernel term by term against the
/// moments. Exact up to the accuracy of the moments themselves.
pub fn build_assoc(sys: &BopsSystem, n: usize) -> Result<AssocLevel> {
    let tbl = &sys.moments;
    tbl.require(n + 1)?;
    let lv = sys.level(n);
    if n == 0 {
        let a = Poly::constant(lv.kappa.inv());
        return Ok(AssocLevel { n, psi: a.clone(), psistar: a });
    }
    let w = |k: i64| tbl.get(k);
    let mut a = vec![C64::new(0.0, 0.0); n + 1];
    let mut b = vec![C64::new(0.0, 0.0); n + 1];
    for k in 1..=n {
        for q in 0..k {
            let bb = k - 1 - q;
            let (kk, qq) = (k as i64, q as i64);
            a[bb] += lv.c[k] * w(-qq - 1);
            a[bb + 1] += lv.c[k] * w(-qq);
            b[n + bb - k] += lv.cbar[k] * w(kk - qq - 1);
            b[n + bb - k + 1] += lv.cbar[k] * w(kk - qq);
        }
    }
    Ok(AssocLevel { n, psi: Poly::new(a), psistar: Poly::new(b) })
}

impl AssocSet {
    pub fn build(sys: &BopsSystem) -> Result<AssocSet> {
        let levels = (0..=sys.max_level()).map(|n| build_assoc(sys, n)).collect::<Result<_>>()?;
        Ok(AssocSet { levels })
    }
}

/// Pointwise access to every object of one bi-orthogonal system.
#[derive(Clone, Debug)]
pub struct Evaluator {
    pub sys: BopsSystem,
    pub assoc: AssocSet,
    pub weight: Option<SemiClassicalWeight>,
    pub near_circle: f64,
}

impl Evaluator {
    pub fn new(sys: BopsSystem, weight: Option<SemiClassicalWeight>, cfg: &Config) -> Result<Self> {
        let assoc = AssocSet::build(&sys)?;
        Ok(Evaluator { sys, assoc, weight, near_circle: cfg.near_circle })
    }

    pub fn moments(&self) -> &MomentTable {
        &self.sys.moments
    }

    pub fn max_level(&self) -> usize {
        self.sys.max_level()
    }

    fn guard(&self, z: C64) -> Result<Side> {
        if (z.norm() - 1.0).abs() < self.near_circle {
            return Err(Error::NearCircle(z.norm()));
        }
        Ok(Side::of(z))
    }

    pub fn w(&self, z: C64) -> Result<C64> {
        match &self.weight {
            Some(w) => w.eval(z),
            None if self.moments().is_exact() => Ok(self.moments().laurent_eval(z)),
            None => Err(Error::NotApplicable("weight values are unknown for a quadrature-only table".into())),
        }
    }

    pub fn phi(&self, n: usize, z: C64) -> C64 {
        self.sys.phi(n, z)
    }

    pub fn phis(&self, n: usize, z: C64) -> C64 {
        self.sys.phis(n, z)
    }

    pub fn dphi(&self, n: usize, z: C64) -> C64 {
        self.sys.dphi(n, z)
    }

    pub fn dphis(&self, n: usize, z: C64) -> C64 {
        self.sys.dphis(n, z)
    }

    pub fn psi(&self, n: usize, z: C64) -> C64 {
        self.assoc.levels[n].psi.eval(z)
    }

    pub fn psis(&self, n: usize, z: C64) -> C64 {
        self.assoc.levels[n].psistar.eval(z)
    }

    pub fn f_on(&self, z: C64, side: Side) -> C64 {
        caratheodory_on(self.moments(), z, side).value
    }

    pub fn f(&self, z: C64) -> Result<C64> {
        Ok(self.f_on(z, self.guard(z)?))
    }

    pub fn eps_on(&self, n: usize, z: C64, side: Side) -> C64 {
        self.psi(n, z) + self.f_on(z, side) * self.phi(n, z)
    }

    pub fn epss_on(&self, n: usize, z: C64, side: Side) -> C64 {
        self.psis(n, z) - self.f_on(z, side) * self.phis(n, z)
    }

    pub fn eps(&self, n: usize, z: C64) -> Result<C64> {
        Ok(self.eps_on(n, z, self.guard(z)?))
    }

    pub fn epss(&self, n: usize, z: C64) -> Result<C64> {
        Ok(self.epss_on(n, z, self.guard(z)?))
    }

    /// ε_n' by the five-point central stencil with step h.
    pub fn deps(&self, n: usize, z: C64, h: f64) -> Result<C64> {
        let s = self.guard(z)?;
        Ok(five_point(|x| self.eps_on(n, x, s), z, h))
    }

    pub fn depss(&self, n: usize, z: C64, h: f64) -> Result<C64> {
        let s = self.guard(z)?;
        Ok(five_point(|x| self.epss_on(n, x, s), z, h))
    }

    /// ε_n' from ψ_n', φ_n' and the termwise derivative of the truncated F.
    pub fn deps_exact(&self, n: usize, z: C64) -> Result<C64> {
        let s = self.guard(z)?;
        let lv = &self.assoc.levels[n];
        let df = caratheodory_deriv_on(self.moments(), z, s);
        Ok(lv.psi.deriv().eval(z) + df * self.phi(n, z) + self.f_on(z, s) * self.dphi(n, z))
    }

    pub fn depss_exact(&self, n: usize, z: C64) -> Result<C64> {
        let s = self.guard(z)?;
        let lv = &self.assoc.levels[n];
        let df = caratheodory_deriv_on(self.moments(), z, s);
        Ok(lv.psistar.deriv().eval(z) - df * self.phis(n, z) - self.f_on(z, s) * self.dphis(n, z))
    }
}

pub fn five_point<F: Fn(C64) -> C64>(f: F, z: C64, h: f64) -> C64 {
    (f(z - 2.0 * h) - f(z + 2.0 * h) + (f(z + h) - f(z - h)) * 8.0) / (12.0 * h)
}

pub fn central<F: Fn(C64) -> C64>(f: F, z: C64, h: f64) -> C64 {
    (f(z + h) - f(z - h)) / (2.0 * h)
}

/// Recurrence, three-term and Casoratian residuals at the sample points.
pub fn verify_assoc_identities(ev: &Evaluator, zs: &[C64], tol: f64) -> Result<IdentityReport> {
    let mut rep = IdentityReport::new("assoc");
    let s = &ev.sys;
    let k = |n: usize| s.kappa(n);
    let p = |n: usize| s.p(n);
    let pb = |n: usize| s.pb(n);
    let top = ev.max_level();
    rep.record("psi0_normalisation", "assoc:psi0", Some(0), rel(k(0) * ev.psi(0, C64::new(0.3, 0.1)), C64::new(1.0, 0.0)), tol);
    for n in 0..top {
        let (mut ra, mut rb, mut ca, mut cb, mut cc, mut pa, mut pbb, mut pc) =
            (vec![], vec![], vec![], vec![], vec![], vec![], vec![], vec![]);
        for &z in zs {
            let (e0, e1, s0, s1) = (ev.eps(n, z)?, ev.eps(n + 1, z)?, ev.epss(n, z)?, ev.epss(n + 1, z)?);
            let (f0, f1, g0, g1) = (ev.phi(n, z), ev.phi(n + 1, z), ev.phis(n, z), ev.phis(n + 1, z));
            ra.push(rel(k(n) * e1, k(n + 1) * z * e0 - p(n + 1) * s0));
            rb.push(rel(k(n) * s1, k(n + 1) * s0 - pb(n + 1) * z * e0));
            let zn = z.powi(n as i32);
            ca.push(rel_to(f1 * e0 - e1 * f0 - p(n + 1) / k(n) * zn * 2.0, &[f1 * e0, zn]));
            cb.push(rel_to(g1 * s0 - s1 * g0 - pb(n + 1) / k(n) * zn * z * 2.0, &[g1 * s0, zn]));
            cc.push(rel_to(f0 * s0 + e0 * g0 - zn * 2.0, &[f0 * s0, zn]));
            let (q0, q1, t0, t1) = (ev.psi(n, z), ev.psi(n + 1, z), ev.psis(n, z), ev.psis(n + 1, z));
            pa.push(rel_to(f1 * q0 - q1 * f0 - p(n + 1) / k(n) * zn * 2.0, &[f1 * q0, zn]));
            pbb.push(rel_to(g1 * t0 - t1 * g0 - pb(n + 1) / k(n) * zn * z * 2.0, &[g1 * t0, zn]));
            pc.push(rel_to(f0 * t0 + q0 * g0 - zn * 2.0, &[f0 * t0, zn]));
        }
        let a = "assoc:recurrences";
        let c = "assoc:casoratians";
        rep.record_max("eps_recurrence", a, Some(n), ra, tol);
        rep.record_max("epsstar_recurrence", a, Some(n), rb, tol);
        rep.record_max("casoratian_a", c, Some(n), ca, tol);
        rep.record_max("casoratian_b", c, Some(n), cb, tol);
        rep.record_max("casoratian_c", c, Some(n), cc, tol);
        rep.record_max("casoratian_a_psi", c, Some(n), pa, tol);
        rep.record_max("casoratian_b_psi", c, Some(n), pbb, tol);
        rep.record_max("casoratian_c_psi", c, Some(n), pc, tol);
    }
    for n in 1..top {
        let (mut ta, mut tb) = (vec![], vec![]);
        for &z in zs {
            let lhs = k(n) * p(n) * ev.psi(n + 1, z) + k(n - 1) * p(n + 1) * z * ev.psi(n - 1, z);
            ta.push(rel(lhs, (k(n) * p(n + 1) + k(n + 1) * p(n) * z) * ev.psi(n, z)));
            let lhs = k(n) * pb(n) * ev.psis(n + 1, z) + k(n - 1) * pb(n + 1) * z * ev.psis(n - 1, z);
            tb.push(rel(lhs, (k(n) * pb(n + 1) * z + k(n + 1) * pb(n)) * ev.psis(n, z)));
        }
        let a = "assoc:recurrences";
        rep.record_max("psi_three_term", a, Some(n), ta, tol);
        rep.record_max("psistar_three_term", a, Some(n), tb, tol);
    }
    Ok(rep)
}

/// ε_n, ε*_n (both displayed integral forms) and F against direct contour
/// quadrature of their defining integrals.
pub fn verify_eps_direct(ev: &Evaluator, ns: &[usize], zs: &[C64], cfg: &Config, tol: f64) -> Result<IdentityReport> {
    let mut rep = IdentityReport::new("assoc_direct");
    let anchor = "assoc:integral-forms";
    let mut rf = vec![];
    for &z in zs {
        let d = kernel_mean(|t| ev.w(t), z, cfg)?;
        rf.push(rel(d, ev.f(z)?));
    }
    rep.record_max("caratheodory_direct", "moments:caratheodory", None, rf, tol);
    for &n in ns {
        let (mut ra, mut rb, mut rc) = (vec![], vec![], vec![]);
        for &z in zs {
            let e = kernel_mean(|t| Ok(ev.w(t)? * ev.phi(n, t)), z, cfg)?;
            ra.push(rel(e, ev.eps(n, z)?));
            let lv = ev.sys.level(n);
            let s1 = -z.powi(n as i32) * kernel_mean(|t| Ok(ev.w(t)? * lv.phibar(t.inv())), z, cfg)?;
            let s2 = ev.sys.kappa(n).inv() - kernel_mean(|t| Ok(ev.w(t)? * ev.phis(n, t)), z, cfg)?;
            let es = ev.epss(n, z)?;
            rb.push(rel(s1, es));
            rc.push(rel(s2, es));
        }
        rep.record_max("eps_direct", anchor, Some(n), ra, tol);
        rep.record_max("epsstar_direct_first", anchor, Some(n), rb, tol);
        rep.record_max("epsstar_direct_second", anchor, Some(n), rc, tol);
    }
    Ok(rep)
}

/// Boundary value from one side by the two-point Richardson limit
/// 2f(1∓δ) − f(1∓2δ), which cancels the O(δ) term of the radial approach.
pub fn boundary_value<F: Fn(C64) -> C64>(f: F, theta: f64, delta: f64, side: Side) -> C64 {
    let s = if side == Side::Inside { -1.0 } else { 1.0 };
    let at = |d: f64| f(C64::from_polar(1.0 + s * d, theta));
    at(delta) * 2.0 - at(2.0 * delta)
}

/// ε_{n,+} − ε_{n,−} = 2 w φ_n on the circle.
pub fn plemelj_check(ev: &Evaluator, n: usize, thetas: &[f64], delta: f64, tol: f64) -> Result<IdentityReport> {
    let mut rep = IdentityReport::new("assoc_jump");
    let mut r = vec![];
    for &th in thetas {
        let z = C64::from_polar(1.0, th);
        let wz = match ev.w(z) {
            Ok(v) => v,
            Err(Error::BranchCut { .. }) | Err(Error::Pole { .. }) => continue,
            Err(e) => return Err(e),
        };
        let plus = boundary_value(|x| ev.eps_on(n, x, Side::Inside), th, delta, Side::Inside);
        let minus = boundary_value(|x| ev.eps_on(n, x, Side::Outside), th, delta, Side::Outside);
        let want = wz * ev.phi(n, z) * 2.0;
        r.push(rel(plus - minus, want));
    }
    rep.record_max("plemelj_jump", "assoc:plemelj", Some(n), r, tol);
    Ok(rep)
}

/// Laurent coefficients of (κ_n/2)ε_n and (κ_n/2)ε*_n extracted on the two
/// circles, compared with their closed forms in the stored scalars.
pub fn verify_expansions(ev: &Evaluator, n: usize, radii: (f64, f64), tol: f64) -> Result<IdentityReport> {
    let s = &ev.sys;
    if n + 2 > s.max_level() {
        return Err(Error::InsufficientWindow { required: n + 2, available: s.max_level() });
    }
    let mut rep = IdentityReport::new("expansions");
    let anchor = "assoc:expansions";
    let m = (4 * (n + 3)).next_power_of_two().max(64);
    let (ri, ro) = radii;
    for r in [ri, ro] {
        if (r - 1.0).abs() < ev.near_circle {
            return Err(Error::Geometry(format!("extraction radius {r} is on the unit circle; try 0.5 or 2.0")));
        }
    }
    let half = ev.sys.kappa(n) / 2.0;
    let ci = LaurentTable::from_fn(|z| half * ev.eps_on(n, z, Side::Inside), ri, m);
    let co = LaurentTable::from_fn(|z| half * ev.eps_on(n, z, Side::Outside), ro, m);
    let si = LaurentTable::from_fn(|z| half * ev.epss_on(n, z, Side::Inside), ri, m);
    let so = LaurentTable::from_fn(|z| half * ev.epss_on(n, z, Side::Outside), ro, m);
    let k = |j: usize| s.kappa(j);
    let p = |j: usize| s.p(j);
    let pb = |j: usize| s.pb(j);
    let l = |j: usize| s.level(j).l;
    let lb = |j: usize| s.level(j).lbar;
    let mm = s.level(n + 2).m2.unwrap_or_default();
    let one = C64::new(1.0, 0.0);
    let nn = n as i64;
    let checks: [(&str, C64, C64); 10] = [
        ("eps_inside_n", ci.coeff(nn), one),
        ("eps_inside_n1", ci.coeff(nn + 1), -lb(n + 1) / k(n + 1)),
        ("eps_outside_m1", co.coeff(-1), p(n + 1) / k(n + 1)),
        (
            "eps_outside_m2",
            co.coeff(-2),
            k(n) * k(n) / (k(n + 1) * k(n + 1)) * p(n + 2) / k(n + 2) - p(n + 1) / k(n + 1) * l(n + 1) / k(n + 1),
        ),
        ("epsstar_inside_n1", si.coeff(nn + 1), pb(n + 1) / k(n + 1)),
        (
            "epsstar_inside_n2",
            si.coeff(nn + 2),
            k(n) * k(n) / (k(n + 1) * k(n + 1)) * pb(n + 2) / k(n + 2) - pb(n + 1) / k(n + 1) * lb(n + 1) / k(n + 1),
        ),
        ("epsstar_outside_0", so.coeff(0), one),
        ("epsstar_outside_m1", so.coeff(-1), -l(n + 1) / k(n + 1)),
        (
            "epsstar_outside_m2",
            so.coeff(-2),
            l(n + 2) * l(n + 1) / (k(n + 2) * k(n + 1)) - mm / k(n + 2),
        ),
        (
            "phi_subtrailing",
            if n >= 1 { s.level(n).c[1] } else { one },
            if n >= 1 { (k(n) * p(n - 1) + p(n) * lb(n - 1)) / k(n - 1) } else { one },
        ),
    ];
    for (id, got, want) in checks {
        rep.record(id, anchor, Some(n), rel(got, want), tol);
    }
    if n >= 1 {
        rep.record(
            "phistar_subtrailing",
            anchor,
            Some(n),
            rel(s.level(n).cbar[1], (k(n) * pb(n - 1) + pb(n) * l(n - 1)) / k(n - 1)),
            tol,
        );
    }
    // vanishing orders, judged by their size on the sampling circle
    let scale = |t: &LaurentTable| (0..m as i64).map(|j| t.weight_on_circle(j)).fold(0.0, f64::max).max(1e-300);
    let lo_i = (0..nn).map(|j| ci.weight_on_circle(j) / scale(&ci)).fold(0.0, f64::max);
    let lo_si = (0..=nn).map(|j| si.weight_on_circle(j) / scale(&si)).fold(0.0, f64::max);
    let hi_o = (0..m as i64 / 2).map(|j| co.weight_on_circle(j) / scale(&co)).fold(0.0, f64::max);
    rep.record("eps_inside_low_orders", anchor, Some(n), lo_i, tol);
    rep.record("epsstar_inside_low_orders", anchor, Some(n), lo_si, tol);
    rep.record("eps_outside_nonnegative_orders", anchor, Some(n), hi_o, tol);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bops::{build_system, BuildMethod};

    #[test]
    fn lebesgue_eps_values() {
        let cfg = Config::default();
        let sys = build_system(&MomentTable::lebesgue(8), 4, BuildMethod::GramLu, &cfg).unwrap();
        let ev = Evaluator::new(sys, None, &cfg).unwrap();
        let zi = C64::new(0.3, 0.4);
        let zo = C64::new(-1.5, 0.7);
        for n in 0..=4 {
            let zn = zi.powi(n as i32);
            assert!((ev.eps(n, zi).unwrap() - zn * 2.0).norm() < 1e-15);
            assert!(ev.eps(n, zo).unwrap().norm() < 1e-15);
            assert!(ev.epss(n, zi).unwrap().norm() < 1e-15);
            assert!((ev.epss(n, zo).unwrap() - 2.0).norm() < 1e-15);
        }
        assert!(matches!(ev.eps(1, C64::new(0.9995, 0.0)), Err(Error::NearCircle(_))));
    }

    #[test]
    fn five_point_is_fourth_order() {
        let d = five_point(|z| z.exp(), C64::new(0.2, 0.1), 1e-2);
        assert!((d - C64::new(0.2, 0.1).exp()).norm() < 1e-9);
    }
}
