//! 2×2 matrix forms: Y_n, the recurrence matrix K_n, the spectral matrix
//! A_n(z) with its residues, and the Riemann–Hilbert normalisation.

use crate::assoc::{boundary_value, Evaluator, Side};
use crate::coeffs::CoeffSet;
use crate::error::{Error, Result};
use crate::quadrature::LaurentTable;
use crate::report::{rel, rel_to, IdentityReport};
use crate::weight::SemiClassicalWeight;
use crate::C64;
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

pub type Mat2 = Matrix2<C64>;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn mat(a: C64, b: C64, cc: C64, d: C64) -> Mat2 {
    Mat2::new(a, b, cc, d)
}

pub fn max_entry(m: &Mat2) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Largest entrywise difference relative to the larger of the two matrices (floored at 1).
pub fn mat_rel(a: &Mat2, b: &Mat2) -> f64 {
    max_entry(&(a - b)) / max_entry(a).max(max_entry(b)).max(1.0)
}

pub fn commutator(a: &Mat2, b: &Mat2) -> Mat2 {
    a * b - b * a
}

/// Y_n = [[φ_n, ε_n/w], [φ*_n, −ε*_n/w]] evaluated on an explicit side.
pub fn assemble_y_on(ev: &Evaluator, n: usize, z: C64, side: Side) -> Result<Mat2> {
    let w = ev.w(z)?;
    if w.norm() == 0.0 {
        return Err(Error::Input(format!("weight vanishes at {z}")));
    }
    Ok(mat(ev.phi(n, z), ev.eps_on(n, z, side) / w, ev.phis(n, z), -ev.epss_on(n, z, side) / w))
}

pub fn assemble_y(ev: &Evaluator, n: usize, z: C64) -> Result<Mat2> {
    if (z.norm() - 1.0).abs() < ev.near_circle {
        return Err(Error::NearCircle(z.norm()));
    }
    assemble_y_on(ev, n, z, Side::of(z))
}

/// Y_{n+1} = K_n Y_n.
pub fn assemble_k(ev: &Evaluator, n: usize, z: C64) -> Mat2 {
    let s = &ev.sys;
    let k = s.kappa(n);
    mat(s.kappa(n + 1) * z, s.p(n + 1), s.pb(n + 1) * z, s.kappa(n + 1)) / k
}

/// Numerator of A_n(z) = N_n(z)/W(z) in coefficient-function form.
pub fn a_numerator(ev: &Evaluator, set: &CoeffSet, n: usize, z: C64) -> Mat2 {
    let s = &ev.sys;
    let (k, k1) = (s.kappa(n), s.kappa(n + 1));
    let v = set.v(z);
    let (th, ths, om, oms) = (set.th(n, z), set.ths(n, z), set.om(n, z), set.oms(n, z));
    mat(
        -(om + v - k1 / k * z * th),
        s.p(n + 1) / k * th,
        -(s.pb(n + 1) / k) * z * ths,
        oms - v - k1 / k * ths,
    )
}

pub fn a_matrix(ev: &Evaluator, set: &CoeffSet, n: usize, z: C64) -> Mat2 {
    a_numerator(ev, set, n, z) / set.w(z)
}

pub fn a_inf_closed(n: usize, rho_sum: C64, rbar: C64) -> Mat2 {
    let nf = n as f64;
    mat(c(-nf), c(0.0), -(rho_sum + nf) * rbar, rho_sum)
}

/// The origin residue (n − ρ_1)[[1, −r_n], [0, 0]].
pub fn origin_residue(n: usize, rho1: C64, r: C64) -> Mat2 {
    let a = c(n as f64) - rho1;
    mat(a, -a * r, c(0.0), c(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueSet {
    pub n: usize,
    pub z: Vec<C64>,
    pub rho: Vec<C64>,
    /// residue at each z_j, same order as the weight
    pub a: Vec<Mat2>,
    /// −Σ A_j
    pub a_inf: Mat2,
    pub b_inf: Option<Mat2>,
}

impl ResidueSet {
    fn finish(n: usize, w: &SemiClassicalWeight, a: Vec<Mat2>) -> ResidueSet {
        let a_inf = -a.iter().fold(Mat2::zeros(), |acc, m| acc + m);
        ResidueSet { n, z: w.locations(), rho: w.exponents(), a, a_inf, b_inf: None }
    }
}

/// Residues from the coefficient functions: ρ_j N_n(z_j)/(2V(z_j)).
pub fn assemble_residues(ev: &Evaluator, set: &CoeffSet, n: usize) -> Result<ResidueSet> {
    let mut a = Vec::new();
    for (j, s) in set.weight.singularities.iter().enumerate() {
        let v = set.v(s.z);
        if v.norm() < 1e-14 {
            return Err(Error::SingularResidue(j + 1));
        }
        a.push(a_numerator(ev, set, n, s.z) * (s.rho / (v * 2.0)));
    }
    Ok(ResidueSet::finish(n, &set.weight, a))
}

/// [[φ*ε, −φε], [−φ*ε*, φε*]] (−ρ_j/2) z_j^{−n} at a non-zero singularity.
pub fn bilinear_residue(ev: &Evaluator, n: usize, z: C64, rho: C64) -> Result<Mat2> {
    let (f, fs, e, es) = (ev.phi(n, z), ev.phis(n, z), ev.eps(n, z)?, ev.epss(n, z)?);
    Ok(mat(fs * e, -f * e, -fs * es, f * es) * (-rho * 0.5 * z.powi(-(n as i32))))
}

/// Residues from the bilinear products, with the origin residue in its
/// closed form. Needs only level n of the system.
pub fn residues_bilinear(ev: &Evaluator, weight: &SemiClassicalWeight, n: usize) -> Result<ResidueSet> {
    let r = ev.sys.level(n).r;
    let mut a = Vec::new();
    for s in &weight.singularities {
        if s.z.norm() == 0.0 {
            a.push(origin_residue(n, s.rho, r));
        } else {
            a.push(bilinear_residue(ev, n, s.z, s.rho)?);
        }
    }
    Ok(ResidueSet::finish(n, weight, a))
}

/// Trace, determinant and A_∞ constraints of a residue set.
pub fn verify_residues(rs: &ResidueSet, rbar: C64, tol: f64) -> IdentityReport {
    let mut rep = IdentityReport::new("lax_residues");
    let n = rs.n;
    let a = "lax:residues";
    let sr: C64 = rs.rho.iter().sum();
    for (j, m) in rs.a.iter().enumerate() {
        let want = if rs.z[j].norm() == 0.0 { c(n as f64) - rs.rho[j] } else { -rs.rho[j] };
        rep.record(&format!("trace_a{}", j + 1), a, Some(n), rel(m.trace(), want), tol);
        rep.record(&format!("det_a{}", j + 1), a, Some(n), m.determinant().norm() / max_entry(m).powi(2).max(1.0), tol);
    }
    rep.record("a_inf_closed_form", "lax:a-infinity", Some(n), mat_rel(&rs.a_inf, &a_inf_closed(n, sr, rbar)), tol);
    rep
}

/// Matrix-level identities at the sample points. Derivatives of Y and of
/// the X/Z variants are central differences with step h.
pub fn verify_matrix_system(ev: &Evaluator, set: &CoeffSet, n: usize, zs: &[C64], h: f64, tol: f64, fd_tol: f64) -> Result<IdentityReport> {
    if n + 1 > set.max() || n + 2 > ev.max_level() {
        return Err(Error::InsufficientWindow { required: n + 2, available: ev.max_level() });
    }
    let s = &ev.sys;
    let (k, p, pb) = (|j| s.kappa(j), |j| s.p(j), |j| s.pb(j));
    let wt = &set.weight;
    let mut rep = IdentityReport::new("lax_matrix");
    let nf = n as f64;
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); 9];
    for &z in zs {
        let side = Side::of(z);
        let wfun = |x: C64| ev.w(x);
        let y = |m: usize, x: C64| assemble_y_on(ev, m, x, side);
        let wz = set.w(z);
        let v = set.v(z);
        let a = a_matrix(ev, set, n, z);
        let y0 = y(n, z)?;
        let dy = (y(n, z + h)? - y(n, z - h)?) / c(2.0 * h);
        rows[0].push(mat_rel(&dy, &(a * y0)));
        rows[1].push(rel(a.trace(), c(nf) / z - wt.log_derivative(z)));
        let kk = assemble_k(ev, n, z);
        let dk = mat(k(n + 1), c(0.0), pb(n + 1), c(0.0)) / k(n);
        rows[2].push(mat_rel(&dk, &(a_matrix(ev, set, n + 1, z) * kk - kk * a)));
        rows[3].push(mat_rel(&y(n + 1, z)?, &(kk * y0)));
        let wv = wfun(z)?;
        rows[4].push(rel(y0.determinant() * wv, -(z.powi(n as i32)) * 2.0));
        // X, X*, Z, Z*: W M' = MM M
        let tw = |x: C64| -> Result<[C64; 8]> {
            let w = wfun(x)?;
            Ok([
                ev.phi(n + 1, x),
                ev.eps_on(n + 1, x, side) / w,
                ev.phi(n, x),
                ev.eps_on(n, x, side) / w,
                ev.phis(n + 1, x),
                ev.epss_on(n + 1, x, side) / w,
                ev.phis(n, x),
                ev.epss_on(n, x, side) / w,
            ])
        };
        let build = |q: [C64; 8]| {
            let [f1, e1, f0, e0, g1, s1, g0, s0] = q;
            [mat(f1, e1, f0, e0), mat(g1, s1, g0, s0), mat(f1, e1, g0, -s0), mat(g1, -s1, f0, e0)]
        };
        let m0 = build(tw(z)?);
        let mp = build(tw(z + h)?);
        let mm = build(tw(z - h)?);
        let (th, ths, om, oms) = (set.th(n, z), set.ths(n, z), set.om(n, z), set.oms(n, z));
        let (th1, ths1) = (set.th(n + 1, z), set.ths(n + 1, z));
        let kr = k(n) / k(n + 1);
        let coef = [
            mat(om - v + wz * nf / z, -(k(n) * p(n + 2) / (k(n + 1) * p(n + 1))) * z * th1, th, -om - v),
            mat(-oms - v + wz * (nf + 1.0) / z, k(n) * pb(n + 2) / (k(n + 1) * pb(n + 1)) * z * ths1, -ths, oms - v),
            mat(
                -oms - v + kr * ths + wz * (nf + 1.0) / z,
                k(n) * p(n + 2) / (k(n + 1) * k(n + 1)) * th1,
                -(pb(n + 1) / k(n + 1)) * ths,
                oms - v - kr * ths,
            ),
            mat(
                om - v - kr * z * th + wz * nf / z,
                -(k(n) * pb(n + 2) / (k(n + 1) * k(n + 1))) * z * z * ths1,
                p(n + 1) / k(n + 1) * th,
                -om - v + kr * z * th,
            ),
        ];
        for i in 0..4 {
            let d = (mp[i] - mm[i]) / c(2.0 * h) * wz;
            rows[5 + i].push(mat_rel(&d, &(coef[i] * m0[i])));
        }
    }
    let fd = "lax:spectral-derivative";
    rep.record_max("y_derivative", fd, Some(n), rows[0].clone(), fd_tol);
    rep.record_max("trace_a", "lax:trace", Some(n), rows[1].clone(), tol);
    rep.record_max("k_compatibility", "lax:compatibility", Some(n), rows[2].clone(), tol);
    rep.record_max("y_recurrence", "lax:recurrence", Some(n), rows[3].clone(), tol);
    rep.record_max("det_y", "lax:determinant", Some(n), rows[4].clone(), tol);
    for (i, id) in ["x_derivative", "xstar_derivative", "z_derivative", "zstar_derivative"].iter().enumerate() {
        rep.record_max(id, "lax:variants", Some(n), rows[5 + i].clone(), fd_tol);
    }
    rep.record("det_k", "lax:recurrence", Some(n), rel(k(n + 1) * k(n + 1) - p(n + 1) * pb(n + 1), k(n) * k(n)), tol);

    // residues: coefficient form against the bilinear form
    let rs = assemble_residues(ev, set, n)?;
    rep.merge(verify_residues(&rs, s.level(n).rbar, tol));
    let mut alt = Vec::new();
    for (j, sg) in wt.singularities.iter().enumerate() {
        let other = if sg.z.norm() == 0.0 {
            origin_residue(n, sg.rho, s.level(n).r)
        } else {
            bilinear_residue(ev, n, sg.z, sg.rho)?
        };
        alt.push(mat_rel(&rs.a[j], &other));
    }
    rep.record_max("residue_alternative_form", "lax:residues", Some(n), alt, tol);

    // summation identities: origin terms come from the coefficient-form A_1
    let mut sums = [c(0.0); 4];
    for (j, sg) in wt.singularities.iter().enumerate() {
        if sg.z.norm() == 0.0 {
            let a1 = rs.a[j];
            sums[0] += a1[(0, 1)];
            sums[1] -= a1[(0, 0)];
            sums[2] -= a1[(1, 1)];
            sums[3] += a1[(1, 0)];
        } else {
            let z = sg.z;
            let f = sg.rho * 0.5 * z.powi(-(n as i32));
            let (f0, g0, e0, s0) = (ev.phi(n, z), ev.phis(n, z), ev.eps(n, z)?, ev.epss(n, z)?);
            sums[0] += f * f0 * e0;
            sums[1] += f * g0 * e0;
            sums[2] += f * f0 * s0;
            sums[3] += f * g0 * s0;
        }
    }
    let sr = wt.rho_sum();
    let want = [c(0.0), c(-nf), sr, (sr + nf) * s.level(n).rbar];
    for (i, (g, w)) in sums.iter().zip(want).enumerate() {
        rep.record(&format!("summation_{}", i + 1), "lax:summation", Some(n), rel_to(g - w, &[w, c(1.0)]), tol);
    }
    Ok(rep)
}

/// Ŷ = diag(1/κ_n, κ_n) Y_n diag(1, w/2z) on an explicit side.
pub fn y_hat_on(ev: &Evaluator, n: usize, z: C64, side: Side) -> Mat2 {
    let k = ev.sys.kappa(n);
    let two_z = z * 2.0;
    mat(
        ev.phi(n, z) / k,
        ev.eps_on(n, z, side) / (two_z * k),
        ev.phis(n, z) * k,
        -(ev.epss_on(n, z, side) * k) / two_z,
    )
}

fn laurent_entries(ev: &Evaluator, n: usize, radius: f64, side: Side, m: usize) -> Vec<LaurentTable> {
    (0..4)
        .map(|i| LaurentTable::from_fn(|z| y_hat_on(ev, n, z, side)[(i / 2, i % 2)], radius, m))
        .collect()
}

/// Jump condition across 𝕋, the determinant and the asymptotic orders at
/// 0 and ∞ for the normalised solution.
pub fn rhp_jump_check(ev: &Evaluator, n: usize, thetas: &[f64], delta: f64, tol: f64) -> Result<IdentityReport> {
    if n == 0 {
        return Err(Error::Input("the Riemann-Hilbert normalisation needs n >= 1".into()));
    }
    let mut rep = IdentityReport::new("rhp");
    let mut jumps = Vec::new();
    let mut skipped = 0usize;
    for &th in thetas {
        let z = C64::from_polar(1.0, th);
        let wz = match ev.w(z) {
            Ok(v) => v,
            Err(Error::BranchCut { .. }) | Err(Error::Pole { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut plus = Mat2::zeros();
        let mut minus = Mat2::zeros();
        for i in 0..4 {
            let (r, cc) = (i / 2, i % 2);
            plus[(r, cc)] = boundary_value(|x| y_hat_on(ev, n, x, Side::Inside)[(r, cc)], th, delta, Side::Inside);
            minus[(r, cc)] = boundary_value(|x| y_hat_on(ev, n, x, Side::Outside)[(r, cc)], th, delta, Side::Outside);
        }
        let jump = mat(c(1.0), wz / z, c(0.0), c(1.0));
        jumps.push(mat_rel(&plus, &(minus * jump)));
    }
    if skipped > 0 {
        rep.note(format!("{skipped} theta samples rejected on a branch cut"));
    }
    rep.record_max("rhp_jump", "lax:rhp-jump", Some(n), jumps, tol);

    let mut dets = Vec::new();
    for z in [C64::new(0.5, 0.0), C64::new(0.3, 0.4), C64::new(-1.7, 0.6), C64::new(0.0, 2.5)] {
        let y = y_hat_on(ev, n, z, Side::of(z));
        let want = -z.powi(n as i32 - 1);
        dets.push(rel(y.determinant(), want));
    }
    rep.record_max("rhp_determinant", "lax:rhp-determinant", Some(n), dets, tol);

    // z → ∞: entry orders n, −2, n, −1 with unit leading terms on the diagonal
    let m = 64;
    let big = laurent_entries(ev, n, 10.0, Side::Outside, m);
    let small = laurent_entries(ev, n, 0.1, Side::Inside, m);
    let nn = n as i64;
    let size = |t: &LaurentTable| (-(m as i64) / 2 + 1..m as i64 / 2).map(|j| t.weight_on_circle(j)).fold(0.0, f64::max);
    let above = |t: &LaurentTable, top: i64| {
        let s = size(t).max(1e-300);
        (top + 1..m as i64 / 2).map(|j| t.weight_on_circle(j)).fold(0.0, f64::max) / s
    };
    let below = |t: &LaurentTable, low: i64| {
        let s = size(t).max(1e-300);
        (-(m as i64) / 2 + 1..low).map(|j| t.weight_on_circle(j)).fold(0.0, f64::max) / s
    };
    let a = "lax:rhp-asymptotics";
    let tops = [nn, -2, nn, -1];
    let infinity: Vec<f64> = big.iter().zip(tops).map(|(t, top)| above(t, top)).collect();
    rep.record_max("rhp_order_infinity", a, Some(n), infinity, tol);
    rep.record("rhp_lead_11", a, Some(n), rel(big[0].coeff(nn), c(1.0)), tol);
    rep.record("rhp_lead_22", a, Some(n), rel(big[3].coeff(-1), c(-1.0)), tol);
    let lows = [0, nn - 1, 0, nn];
    let origin: Vec<f64> = small.iter().zip(lows).map(|(t, low)| below(t, low)).collect();
    rep.record_max("rhp_order_origin", a, Some(n), origin, tol);

    // log-slope of the (1,1) entry between two large radii
    let mean_log = |r: f64| {
        let pts = 32;
        (0..pts)
            .map(|q| {
                let z = C64::from_polar(r, 2.0 * std::f64::consts::PI * (q as f64 + 0.5) / pts as f64);
                y_hat_on(ev, n, z, Side::Outside)[(0, 0)].norm().ln()
            })
            .sum::<f64>()
            / pts as f64
    };
    let slope = (mean_log(2000.0) - mean_log(1000.0)) / 2f64.ln();
    rep.record("rhp_log_slope_11", a, Some(n), (slope - n as f64).abs(), 0.01);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bops::{build_system, BuildMethod};
    use crate::config::Config;
    use crate::moments::MomentTable;

    #[test]
    fn lebesgue_y_and_k() {
        let cfg = Config::default();
        let sys = build_system(&MomentTable::lebesgue(8), 4, BuildMethod::GramLu, &cfg).unwrap();
        let ev = Evaluator::new(sys, None, &cfg).unwrap();
        let z = C64::new(0.3, 0.2);
        let y = assemble_y(&ev, 2, z).unwrap();
        let z2 = z * z;
        assert!(mat_rel(&y, &mat(z2, z2 * 2.0, c(1.0), c(0.0))) < 1e-14);
        assert!((assemble_k(&ev, 2, z).determinant() - z).norm() < 1e-14);
    }

    #[test]
    fn a_inf_shape() {
        let a = a_inf_closed(2, c(0.5), c(0.25));
        assert_eq!(a[(0, 0)], c(-2.0));
        assert_eq!(a[(1, 0)], c(-0.625));
    }
}
