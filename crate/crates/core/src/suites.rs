//! Named verification suites used by the CLI and the acceptance run.

use crate::assoc::{plemelj_check, verify_assoc_identities, verify_eps_direct, verify_expansions, Evaluator};
use crate::bops::{build_system, monomial_orthogonality_defect, orthonormality_defect, verify_scalar_identities, BuildMethod};
use crate::coeffs::{
    dpainleve_ratio_check, spectral_derivative_check, verify_bilinear, verify_degrees, verify_expansion_closed_forms,
    verify_initial_members, verify_linear_relations, verify_telescoping, CoeffSet,
};
use crate::config::Config;
use crate::deform::{isomonodromy_check, monodromy_identities, verify_flow, verify_rates, Trajectory};
use crate::error::Result;
use crate::lax::{rhp_jump_check, verify_matrix_system};
use crate::moments::{heine_oracle, recover_u, toeplitz_det, weight_moments, MomentSource, MomentTable};
use crate::report::{rel, IdentityReport};
use crate::samples::{annulus_points, point_pairs};
use crate::weight::{build_vw, validate_weight, SemiClassicalWeight, Singularity};
use crate::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The regular weight z^{−1}(z−2)^{1/2}(z−3)^{1/3}.
pub fn strict_weight() -> SemiClassicalWeight {
    SemiClassicalWeight::new(
        vec![Singularity::real(0.0, -1.0), Singularity::real(2.0, 0.5), Singularity::real(3.0, 1.0 / 3.0)],
        true,
    )
}

/// z^{−1}(1+z)² in singularity form (not strict: the exponent 2 is an integer).
pub fn laurent_weight() -> SemiClassicalWeight {
    SemiClassicalWeight::new(vec![Singularity::real(0.0, -1.0), Singularity::real(-1.0, 2.0)], false)
}

pub fn laurent_moments(window: usize) -> MomentTable {
    MomentTable::from_pairs(&[(-1, c(1.0)), (0, c(2.0)), (1, c(1.0))], Some(window), MomentSource::ClosedForm)
}

/// z_2: 2 → 2.1 over t ∈ [0, 0.1].
pub fn default_trajectory() -> Trajectory {
    Trajectory { j: 1, from: c(2.0), to: c(2.1), t_span: (0.0, 0.1) }
}

/// Recurrence, Casoratian, orthogonality and expansion checks that apply to any weight.
pub fn general_suite(ev: &Evaluator, cfg: &Config, tol: f64, n_top: usize) -> Result<IdentityReport> {
    let mut rep = IdentityReport::new("general");
    let avoid: Vec<C64> = ev.weight.as_ref().map(|w| w.locations()).unwrap_or_default();
    let zs = annulus_points(0.2, 2.5, 8, 0.05, &avoid, cfg.seed);
    let pairs = point_pairs(0.2, 0.8, 6, cfg.seed + 1);
    rep.merge(verify_scalar_identities(&ev.sys, &zs, &pairs, tol));
    rep.merge(verify_assoc_identities(ev, &zs, tol)?);
    rep.record("orthonormality", "bops:orthonormality", None, orthonormality_defect(&ev.sys), tol);
    rep.record("monomial_orthogonality", "bops:orthonormality", None, monomial_orthogonality_defect(&ev.sys), tol);
    for n in 1..=n_top.min(ev.max_level().saturating_sub(2)) {
        rep.merge(verify_expansions(ev, n, (0.5, 2.0), tol)?);
    }
    Ok(rep)
}

/// w ≡ 1 from raw moments.
pub fn lebesgue_suite(n: usize, cfg: &Config) -> Result<IdentityReport> {
    let tol = 1e-12;
    let tbl = MomentTable::lebesgue(n + 2);
    let sys = build_system(&tbl, n, BuildMethod::Both, cfg)?;
    let ev = Evaluator::new(sys, None, cfg)?;
    let mut rep = IdentityReport::new("lebesgue");
    let zi = [C64::new(0.3, 0.4), C64::new(-0.5, 0.1)];
    let zo = [C64::new(1.5, -0.7), C64::new(-2.0, 1.0)];
    for k in 0..=n {
        let lv = ev.sys.level(k);
        rep.record("kappa_unit", "lebesgue:values", Some(k), (lv.kappa - 1.0).norm(), tol);
        if k > 0 {
            rep.record("reflection_zero", "lebesgue:values", Some(k), lv.r.norm().max(lv.rbar.norm()), tol);
        }
        let mut dp = Vec::new();
        let mut de = Vec::new();
        for &z in zi.iter().chain(&zo) {
            dp.push((ev.phi(k, z) - z.powi(k as i32)).norm());
        }
        for &z in &zi {
            de.push((ev.eps(k, z)? - z.powi(k as i32) * 2.0).norm());
        }
        for &z in &zo {
            de.push(ev.eps(k, z)?.norm());
        }
        rep.record_max("phi_monomial", "lebesgue:values", Some(k), dp, tol);
        rep.record_max("eps_values", "lebesgue:values", Some(k), de, tol);
    }
    rep.merge(general_suite(&ev, cfg, tol, n.saturating_sub(2))?);
    Ok(rep)
}

/// w = z^{−1}(1+z)² from its three moments, with closed forms for the
/// Toeplitz data and a comparison against the singularity-form route.
pub fn laurent_suite(n: usize, cfg: &Config) -> Result<IdentityReport> {
    let tol = 1e-10;
    let tbl = laurent_moments(n + 3);
    let sys = build_system(&tbl, n + 1, BuildMethod::Both, cfg)?;
    let ev = Evaluator::new(sys, None, cfg)?;
    let mut rep = IdentityReport::new("laurent");
    let a = "laurent:closed-forms";
    for k in 0..=n {
        let kf = k as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        rep.record("toeplitz_i0", a, Some(k), rel(toeplitz_det(&tbl, 0, k)?.value, c(kf + 1.0)), tol);
        rep.record("toeplitz_i1", a, Some(k), rel(toeplitz_det(&tbl, 1, k)?.value, c(1.0)), tol);
        rep.record("toeplitz_im1", a, Some(k), rel(toeplitz_det(&tbl, -1, k)?.value, c(1.0)), tol);
        let lv = ev.sys.level(k);
        rep.record("reflection_r", a, Some(k), rel(lv.r, c(sign / (kf + 1.0))), tol);
        rep.record("reflection_rbar", a, Some(k), rel(lv.rbar, c(sign / (kf + 1.0))), tol);
        rep.record("kappa_squared", a, Some(k), rel(lv.kappa * lv.kappa, c((kf + 1.0) / (kf + 2.0))), tol);
    }
    let w = laurent_weight();
    let qt = weight_moments(&w, n + 3, cfg)?;
    let qs = build_system(&qt, n + 1, BuildMethod::GramLu, cfg)?;
    let dev = (0..=n + 1)
        .map(|k| {
            let (x, y) = (ev.sys.level(k), qs.level(k));
            x.c.iter().zip(&y.c).chain(x.cbar.iter().zip(&y.cbar)).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    rep.record("two_routes_agree", "laurent:two-routes", None, dev, tol);
    rep.merge(general_suite(&ev, cfg, tol, n.saturating_sub(1))?);
    Ok(rep)
}

/// Unitary-group averages against Toeplitz determinants.
pub fn heine_suite(ns: &[usize], points: usize, cfg: &Config) -> Result<IdentityReport> {
    let mut rep = IdentityReport::new("heine");
    let strict = strict_weight();
    let lw = laurent_weight();
    let cases: [(&str, &SemiClassicalWeight); 2] = [("laurent", &lw), ("strict", &strict)];
    for (name, w) in cases {
        let tbl = weight_moments(w, 16, cfg)?;
        for &n in ns {
            let want = toeplitz_det(&tbl, 0, n)?.value;
            let got = heine_oracle(|z| w.eval(z), n, points)?;
            rep.record(&format!("heine_{name}"), "moments:heine", Some(n), rel(got, want), 1e-6);
        }
    }
    Ok(rep)
}

/// Everything that needs the coefficient functions, for levels 1..=nmax.
pub fn strict_suite(w: &SemiClassicalWeight, nmax: usize, cfg: &Config) -> Result<IdentityReport> {
    let mut rep = IdentityReport::new("strict");
    let vr = validate_weight(w, w.strict)?;
    for cond in &vr.conditions {
        rep.record(&format!("weight_{}", cond.name), "weight:validation", None, if cond.pass { 0.0 } else { 1.0 }, 0.5);
    }
    let tbl = weight_moments(w, cfg.window, cfg)?;
    let sys = build_system(&tbl, nmax + 2, BuildMethod::Both, cfg)?;
    let ev = Evaluator::new(sys, Some(w.clone()), cfg)?;
    let set = CoeffSet::build(&ev, nmax + 1, cfg)?;
    let tol = cfg.identity_tol;
    let locs = w.locations();
    let zs = annulus_points(0.2, 2.6, 10, 0.1, &locs, cfg.seed);
    rep.merge(general_suite(&ev, cfg, 1e-9, nmax)?);
    rep.merge(verify_eps_direct(&ev, &[1, 2, 3], &zs[..4], cfg, 1e-9)?);
    rep.merge(verify_degrees(&set, cfg.degree_cert, cfg.fit_residual));
    let vw = build_vw(w);
    let u_in = recover_u(&vw, &tbl, 0.5, cfg)?;
    let u_out = recover_u(&vw, &tbl, 2.5, cfg)?;
    let du = (&u_in.u - &u_out.u).max_abs() / u_in.u.max_abs().max(1.0);
    rep.record("u_sides_agree", "coeffs:u-recovery", None, du, tol);
    rep.merge(verify_initial_members(&ev, &set, &u_in, tol));
    rep.merge(verify_telescoping(&ev, &set, &u_in, nmax, 1e-7)?);
    let nz: Vec<usize> = (0..w.m()).filter(|&j| w.singularities[j].z.norm() > 0.0).collect();
    for n in 1..=nmax {
        rep.merge(verify_expansion_closed_forms(&ev, &set, n, tol));
        rep.merge(verify_linear_relations(&ev, &set, n, &zs, tol)?);
        rep.merge(verify_bilinear(&ev, &set, n, tol)?);
        rep.merge(spectral_derivative_check(&ev, &set, n, &zs, cfg.fd_step, tol)?);
        rep.merge(verify_matrix_system(&ev, &set, n, &zs, cfg.fd_step, tol, cfg.fd_tol)?);
        if nz.len() >= 2 {
            rep.merge(dpainleve_ratio_check(&ev, &set, n, nz[0], nz[1], 1e-7)?);
        }
    }
    Ok(rep)
}

/// Jump, determinant and asymptotics of the normalised RHP solution.
pub fn rhp_suite(ns: &[usize], thetas: usize, cfg: &Config) -> Result<IdentityReport> {
    let mut rep = IdentityReport::new("rhp");
    let th: Vec<f64> = (0..thetas).map(|q| 2.0 * std::f64::consts::PI * (q as f64 + 0.37) / thetas as f64).collect();
    let top = ns.iter().copied().max().unwrap_or(1);
    let w = strict_weight();
    let tbl = weight_moments(&w, cfg.window, cfg)?;
    let ev_s = Evaluator::new(build_system(&tbl, top + 1, BuildMethod::GramLu, cfg)?, Some(w), cfg)?;
    let ev_l = Evaluator::new(build_system(&laurent_moments(top + 3), top + 1, BuildMethod::GramLu, cfg)?, None, cfg)?;
    for (name, ev) in [("strict", &ev_s), ("laurent", &ev_l)] {
        for &n in ns {
            let mut r = rhp_jump_check(ev, n, &th, cfg.rhp_offset, cfg.fd_tol)?;
            r.merge(plemelj_check(ev, n, &th, cfg.rhp_offset, cfg.fd_tol)?);
            for e in &mut r.entries {
                e.id = format!("{}_{name}", e.id);
            }
            rep.merge(r);
        }
    }
    Ok(rep)
}

/// Flow, rates and connection coefficients along a trajectory.
pub fn deform_suite(w: &SemiClassicalWeight, traj: &Trajectory, ns: &[usize], steps: usize, cfg: &Config) -> Result<IdentityReport> {
    let mut rep = IdentityReport::new("deform");
    let locs = w.locations();
    let zs = annulus_points(0.2, 1.8, 4, 0.15, &locs, cfg.seed);
    for &n in ns {
        rep.merge(verify_flow(w, traj, n, steps, cfg)?);
        rep.merge(verify_rates(w, traj, n, traj.t_span.0 + 0.3 * traj.duration(), &zs, cfg)?);
    }
    for j in 0..w.m() {
        if w.singularities[j].z.norm() == 0.0 {
            continue;
        }
        let mr = isomonodromy_check(w, traj, j, 5, cfg)?;
        rep.merge(monodromy_identities(&mr, cfg.fd_tol));
    }
    Ok(rep)
}
