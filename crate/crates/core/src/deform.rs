//! Moving the singularities z_j(t): rates of the scalar data, the
//! Schlesinger flow for the residues and the connection coefficients C_j.

use crate::assoc::{Evaluator, Side};
use crate::bops::{build_system, BuildMethod};
use crate::coeffs::CoeffSet;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::lax::{assemble_k, assemble_y_on, commutator, mat, mat_rel, max_entry, residues_bilinear, Mat2};
use crate::linalg::lstsq;
use crate::moments::{caratheodory_on, weight_moments};
use crate::quadrature::circle_nodes;
use crate::report::{rel, rel_to, IdentityReport};
use crate::weight::SemiClassicalWeight;
use crate::C64;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Linear motion of one singularity, z_j(t) = from + (to − from)(t − t0)/(t1 − t0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// 0-based index into the weight's singularity list
    pub j: usize,
    pub from: C64,
    pub to: C64,
    pub t_span: (f64, f64),
}

#[derive(Deserialize)]
struct RawTrajectory {
    j: usize,
    #[serde(default = "linear")]
    path: String,
    from: [f64; 2],
    to: [f64; 2],
    t_span: Option<[f64; 2]>,
}

fn linear() -> String {
    "linear".into()
}

impl Trajectory {
    /// JSON form {"j":2,"path":"linear","from":[2,0],"to":[2.1,0]} with a
    /// 1-based j and an optional "t_span".
    pub fn from_json(text: &str) -> Result<Trajectory> {
        let raw: RawTrajectory = serde_json::from_str(text)?;
        if raw.path != "linear" {
            return Err(Error::Input(format!("unsupported path kind {:?}", raw.path)));
        }
        if raw.j == 0 {
            return Err(Error::Input("trajectory index j is 1-based".into()));
        }
        let t = raw.t_span.unwrap_or([0.0, 1.0]);
        Ok(Trajectory { j: raw.j - 1, from: C64::new(raw.from[0], raw.from[1]), to: C64::new(raw.to[0], raw.to[1]), t_span: (t[0], t[1]) })
    }

    pub fn duration(&self) -> f64 {
        self.t_span.1 - self.t_span.0
    }

    pub fn z(&self, t: f64) -> C64 {
        let d = self.duration();
        if d == 0.0 {
            return self.from;
        }
        self.from + (self.to - self.from) * ((t - self.t_span.0) / d)
    }

    pub fn zdot(&self) -> C64 {
        let d = self.duration();
        if d == 0.0 {
            c(0.0)
        } else {
            (self.to - self.from) / d
        }
    }

    pub fn zdots(&self, m: usize) -> Vec<C64> {
        (0..m).map(|k| if k == self.j { self.zdot() } else { c(0.0) }).collect()
    }

    pub fn weight_at(&self, base: &SemiClassicalWeight, t: f64) -> SemiClassicalWeight {
        base.with_location(self.j, self.z(t))
    }

    /// The moving point stays off 𝕋, away from the others and the origin stays fixed.
    pub fn validate(&self, base: &SemiClassicalWeight) -> Result<()> {
        let m = base.m();
        if self.j >= m {
            return Err(Error::Input(format!("trajectory moves singularity {} of {}", self.j + 1, m)));
        }
        if base.singularities[self.j].z.norm() == 0.0 {
            return Err(Error::Input("the origin singularity is fixed".into()));
        }
        if (base.singularities[self.j].z - self.from).norm() > 1e-12 {
            return Err(Error::Input("trajectory does not start at the singularity".into()));
        }
        let rho = base.singularities[self.j].rho;
        for q in 0..=200 {
            let t = self.t_span.0 + self.duration() * q as f64 / 200.0;
            let z = self.z(t);
            if (z.norm() - 1.0).abs() < 1e-3 && rho.re <= 0.0 {
                return Err(Error::Geometry(format!("trajectory meets the unit circle at t = {t}")));
            }
            if (z.norm() < 1.0) != (self.from.norm() < 1.0) {
                let w = self.weight_at(base, t);
                let org = w.origin_exponent();
                if (org.re - org.re.round()).abs() > 1e-12 || org.im.abs() > 1e-12 {
                    return Err(Error::Geometry(format!(
                        "crossing the unit circle at t = {t} leaves the weight multivalued on the circle (inside exponent {org})"
                    )));
                }
            }
            for (k, s) in base.singularities.iter().enumerate() {
                if k != self.j && (s.z - z).norm() < 1e-3 {
                    return Err(Error::Geometry(format!("trajectory collides with singularity {} at t = {t}", k + 1)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    SchlesingerFlow,
    MomentRebuild,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformState {
    pub t: f64,
    pub n: usize,
    pub z: Vec<C64>,
    pub rho: Vec<C64>,
    pub a: Vec<Mat2>,
    pub b_inf: Option<Mat2>,
    pub kappa: C64,
    pub r: C64,
    pub rbar: C64,
    pub provenance: Provenance,
}

impl DeformState {
    pub fn scalars(&self) -> [C64; 3] {
        [self.kappa, self.r, self.rbar]
    }

    /// Largest difference over the scalars and every residue entry.
    pub fn max_diff(&self, other: &DeformState) -> f64 {
        let mut d = self.scalars().iter().zip(other.scalars()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        for (a, b) in self.a.iter().zip(&other.a) {
            d = d.max(max_entry(&(a - b)));
        }
        d
    }
}

/// System, evaluator and residues at time t from a fresh moment computation.
pub fn rebuild(base: &SemiClassicalWeight, traj: &Trajectory, n: usize, levels: usize, t: f64, cfg: &Config) -> Result<(DeformState, Evaluator)> {
    let w = traj.weight_at(base, t);
    let tbl = weight_moments(&w, cfg.window, cfg)?;
    let sys = build_system(&tbl, levels.max(n), BuildMethod::GramLu, cfg)?;
    let ev = Evaluator::new(sys, Some(w.clone()), cfg)?;
    let rs = residues_bilinear(&ev, &w, n)?;
    let lv = ev.sys.level(n);
    let state = DeformState {
        t,
        n,
        z: w.locations(),
        rho: w.exponents(),
        a: rs.a,
        b_inf: None,
        kappa: lv.kappa,
        r: lv.r,
        rbar: lv.rbar,
        provenance: Provenance::MomentRebuild,
    };
    Ok((state, ev))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateRate {
    pub da: Vec<Mat2>,
    pub dkappa: C64,
    pub dr: C64,
    pub drbar: C64,
    pub b_inf: Mat2,
}

/// B_∞ assembled from the residues: κ̇/κ = ½Σ(ż_j/z_j)(A_j)_{22} and the
/// (2,1) entry −Σ(ż_j/z_j)(A_j)_{21}.
pub fn b_infinity(state: &DeformState, zdot: &[C64]) -> Result<Mat2> {
    let mut kd = c(0.0);
    let mut b21 = c(0.0);
    for (j, &zd) in zdot.iter().enumerate() {
        if zd.norm() == 0.0 {
            continue;
        }
        let z = state.z[j];
        if z.norm() == 0.0 {
            return Err(Error::Input("the origin cannot move".into()));
        }
        kd += zd / z * state.a[j][(1, 1)] * 0.5;
        b21 -= zd / z * state.a[j][(1, 0)];
    }
    Ok(mat(kd, c(0.0), b21, -kd))
}

pub fn schlesinger_rhs(state: &DeformState, zdot: &[C64]) -> Result<StateRate> {
    let m = state.z.len();
    let b = b_infinity(state, zdot)?;
    let kd = b[(0, 0)];
    let mut da = Vec::with_capacity(m);
    for j in 0..m {
        let mut d = commutator(&b, &state.a[j]);
        for k in 0..m {
            if k == j || zdot[j] == zdot[k] {
                continue;
            }
            let dz = state.z[j] - state.z[k];
            if dz.norm() < 1e-12 {
                return Err(Error::Geometry(format!("singularities {} and {} coincide", j + 1, k + 1)));
            }
            d += commutator(&state.a[k], &state.a[j]) * ((zdot[j] - zdot[k]) / dz);
        }
        da.push(d);
    }
    let mut srz = c(0.0);
    let mut s12 = c(0.0);
    for (j, &zd) in zdot.iter().enumerate() {
        if zd.norm() == 0.0 {
            continue;
        }
        let q = zd / state.z[j];
        srz += state.rho[j] * q;
        s12 += q * state.a[j][(0, 1)];
    }
    Ok(StateRate {
        da,
        dkappa: kd * state.kappa,
        dr: state.r * (-kd * 2.0 - srz) + s12,
        drbar: -kd * 2.0 * state.rbar + b[(1, 0)],
        b_inf: b,
    })
}

fn advance(s: &DeformState, d: &StateRate, h: f64, traj: &Trajectory) -> DeformState {
    let t = s.t + h;
    let mut z = s.z.clone();
    z[traj.j] = traj.z(t);
    DeformState {
        t,
        n: s.n,
        z,
        rho: s.rho.clone(),
        a: s.a.iter().zip(&d.da).map(|(a, da)| a + da * c(h)).collect(),
        b_inf: None,
        kappa: s.kappa + d.dkappa * h,
        r: s.r + d.dr * h,
        rbar: s.rbar + d.drbar * h,
        provenance: Provenance::SchlesingerFlow,
    }
}

/// One classical RK4 step.
pub fn rk4_step(s: &DeformState, traj: &Trajectory, h: f64) -> Result<DeformState> {
    let zd = traj.zdots(s.z.len());
    let k1 = schlesinger_rhs(s, &zd)?;
    let k2 = schlesinger_rhs(&advance(s, &k1, h / 2.0, traj), &zd)?;
    let k3 = schlesinger_rhs(&advance(s, &k2, h / 2.0, traj), &zd)?;
    let k4 = schlesinger_rhs(&advance(s, &k3, h, traj), &zd)?;
    let comb = |f: fn(&StateRate) -> C64| (f(&k1) + f(&k2) * 2.0 + f(&k3) * 2.0 + f(&k4)) / 6.0;
    let da = (0..s.a.len()).map(|j| (k1.da[j] + k2.da[j] * c(2.0) + k3.da[j] * c(2.0) + k4.da[j]) / c(6.0)).collect();
    let avg = StateRate { da, dkappa: comb(|k| k.dkappa), dr: comb(|k| k.dr), drbar: comb(|k| k.drbar), b_inf: k1.b_inf };
    let mut out = advance(s, &avg, h, traj);
    out.b_inf = Some(k1.b_inf);
    Ok(out)
}

/// Fixed-step RK4 over the trajectory's span; returns every step.
pub fn run_rk4(initial: &DeformState, traj: &Trajectory, steps: usize) -> Result<Vec<DeformState>> {
    let mut out = vec![initial.clone()];
    if traj.duration() == 0.0 || steps == 0 {
        return Ok(out);
    }
    let h = traj.duration() / steps as f64;
    let mut s = initial.clone();
    for q in 0..steps {
        s = rk4_step(&s, traj, h)?;
        s.t = traj.t_span.0 + h * (q + 1) as f64;
        out.push(s.clone());
    }
    Ok(out)
}

/// RK4 with a step-halving estimate of the endpoint error; fails if the
/// estimate exceeds `tol`.
pub fn integrate_flow(initial: &DeformState, traj: &Trajectory, steps: usize, tol: f64) -> Result<Vec<DeformState>> {
    let coarse = run_rk4(initial, traj, steps)?;
    if coarse.len() == 1 {
        return Ok(coarse);
    }
    let fine = run_rk4(initial, traj, 2 * steps)?;
    let est = coarse.last().unwrap().max_diff(fine.last().unwrap());
    if est > tol {
        return Err(Error::StepSize { estimate: est, tol });
    }
    Ok(coarse)
}

/// |E(s) − E(2s)| / |E(2s) − E(4s)| for the given coarse step count.
pub fn richardson_ratio(initial: &DeformState, traj: &Trajectory, steps: usize) -> Result<f64> {
    let end = |k: usize| -> Result<DeformState> { Ok(run_rk4(initial, traj, k)?.pop().unwrap()) };
    let (a, b, cc) = (end(steps)?, end(2 * steps)?, end(4 * steps)?);
    Ok(a.max_diff(&b) / b.max_diff(&cc))
}

/// Flow against independent rebuilds: endpoint agreement, Richardson
/// ratio, step-halving change and conservation of Tr A_j and det A_j.
pub fn verify_flow(base: &SemiClassicalWeight, traj: &Trajectory, n: usize, steps: usize, cfg: &Config) -> Result<IdentityReport> {
    traj.validate(base)?;
    let (s0, _) = rebuild(base, traj, n, n, traj.t_span.0, cfg)?;
    let flow = integrate_flow(&s0, traj, steps, cfg.flow_tol)?;
    let end = flow.last().unwrap();
    let (s1, _) = rebuild(base, traj, n, n, traj.t_span.1, cfg)?;
    let mut rep = IdentityReport::new("deform_flow");
    let a = "deform:flow";
    for (id, (x, y)) in ["endpoint_kappa", "endpoint_r", "endpoint_rbar"].iter().zip(end.scalars().iter().zip(s1.scalars())) {
        rep.record(id, a, Some(n), (x - y).norm(), cfg.fd_tol);
    }
    let ent: Vec<f64> = end.a.iter().zip(&s1.a).map(|(x, y)| max_entry(&(x - y))).collect();
    rep.record_max("endpoint_residues", a, Some(n), ent, cfg.fd_tol);
    let fine = run_rk4(&s0, traj, 2 * steps)?;
    rep.record("step_halving_change", "deform:richardson", Some(n), end.max_diff(fine.last().unwrap()), cfg.flow_tol);
    let ratio = richardson_ratio(&s0, traj, 4)?;
    rep.record("richardson_ratio", "deform:richardson", Some(n), (ratio - 16.0).abs(), 4.0);
    let mut tr = Vec::new();
    let mut det = Vec::new();
    for s in &flow {
        for (x, y) in s.a.iter().zip(&s0.a) {
            tr.push((x.trace() - y.trace()).norm());
            det.push(x.determinant().norm());
        }
    }
    rep.record_max("trace_drift", "deform:conservation", Some(n), tr, 1e-8);
    rep.record_max("det_residues", "deform:conservation", Some(n), det, 1e-7);
    let inf0 = -s0.a.iter().fold(Mat2::zeros(), |acc, m| acc + m);
    let inf1 = -end.a.iter().fold(Mat2::zeros(), |acc, m| acc + m);
    rep.record("a_inf_trace", "deform:conservation", Some(n), (inf0.trace() - inf1.trace()).norm(), 1e-8);
    Ok(rep)
}

/// Rates at time t: the displayed sum formulas against each other, against
/// the flow right-hand side and against central differences of rebuilds.
pub fn verify_rates(base: &SemiClassicalWeight, traj: &Trajectory, n: usize, t: f64, zs: &[C64], cfg: &Config) -> Result<IdentityReport> {
    if n == 0 {
        return Err(Error::Input("rate formulas need n >= 1".into()));
    }
    traj.validate(base)?;
    let h = 1e-4;
    let w = traj.weight_at(base, t);
    let (st, ev) = rebuild(base, traj, n, n + 2, t, cfg)?;
    let set = CoeffSet::build(&ev, n + 1, cfg)?;
    let (stp, evp) = rebuild(base, traj, n, n + 2, t + h, cfg)?;
    let (stm, evm) = rebuild(base, traj, n, n + 2, t - h, cfg)?;
    let zd = traj.zdots(w.m());
    let s = &ev.sys;
    let (k, p, pb) = (s.kappa(n), s.p(n), s.pb(n));
    let fd = |f: &dyn Fn(&Evaluator) -> C64| (f(&evp) - f(&evm)) / (2.0 * h);
    let kdot = fd(&|e| e.sys.kappa(n));
    let rdot = fd(&|e| e.sys.level(n).r);
    let rbdot = fd(&|e| e.sys.level(n).rbar);
    let pdot = fd(&|e| e.sys.p(n));
    let pbdot = fd(&|e| e.sys.pb(n));
    let mut rep = IdentityReport::new("deform_rates");
    let a = "deform:rates";

    let (mut rsum, mut rbsum, mut srz) = (c(0.0), c(0.0), c(0.0));
    let (mut k1s, mut k2s, mut ps1, mut ps2, mut pbs1, mut pbs2) = (c(0.0), c(0.0), c(0.0), c(0.0), c(0.0), c(0.0));
    for (j, sg) in w.singularities.iter().enumerate() {
        if zd[j].norm() == 0.0 {
            continue;
        }
        let z = sg.z;
        let v = set.v(z);
        if v.norm() < 1e-14 {
            return Err(Error::SingularResidue(j + 1));
        }
        let q = sg.rho * zd[j] / z;
        let zn = z.powi(-(n as i32));
        let (f, fs, e, es) = (ev.phi(n, z), ev.phis(n, z), ev.eps(n, z)?, ev.epss(n, z)?);
        srz += q;
        rsum += q * (set.om(n - 1, z) - v) / v * 0.5;
        rbsum += q * (set.oms(n - 1, z) + v) / v * 0.5;
        k1s += q * zn * e * fs * 0.5;
        k2s -= q * zn * es * f * 0.5;
        ps1 += q * zn * e * f * 0.5 * (k / p);
        ps2 += s.p(n + 1) / p * sg.rho / (v * 2.0) * zd[j] / z * set.th(n, z);
        pbs1 -= q * zn * es * fs * 0.5 * (k / pb);
        pbs2 += s.pb(n + 1) / pb * sg.rho / (v * 2.0) * zd[j] * set.ths(n, z);
    }
    let k1s = k1s - srz;
    let scale = [kdot / k, c(1e-3)];
    rep.record("kappa_routes_agree", a, Some(n), rel_to(k1s - k2s, &[k1s, k2s]), cfg.identity_tol);
    rep.record("kappa_rate_fd", a, Some(n), rel_to(k1s * 0.5 - kdot / k, &scale), 1e-4);
    rep.record("r_rate_fd", a, Some(n), rel_to(rsum * st.r - rdot, &[rdot, c(1e-3)]), 1e-4);
    rep.record("rbar_rate_fd", a, Some(n), rel_to(rbsum * st.rbar - rbdot, &[rbdot, c(1e-3)]), 1e-4);
    let lhs_p = pdot / p + kdot / k + srz;
    rep.record("phi0_rate_routes", a, Some(n), rel_to(ps1 - ps2, &[ps1, ps2]), cfg.identity_tol);
    rep.record("phi0_rate_fd", a, Some(n), rel_to(ps1 - lhs_p, &[lhs_p, c(1e-3)]), 1e-4);
    let lhs_pb = pbdot / pb + kdot / k;
    rep.record("phibar0_rate_routes", a, Some(n), rel_to(pbs1 - pbs2, &[pbs1, pbs2]), cfg.identity_tol);
    rep.record("phibar0_rate_fd", a, Some(n), rel_to(pbs1 - lhs_pb, &[lhs_pb, c(1e-3)]), 1e-4);

    // flow right-hand side against the same differences
    let rate = schlesinger_rhs(&st, &zd)?;
    let fa = "deform:schlesinger";
    rep.record("flow_kappa_fd", fa, Some(n), rel_to(rate.dkappa - kdot, &[kdot, c(1e-3)]), 1e-4);
    rep.record("flow_r_fd", fa, Some(n), rel_to(rate.dr - rdot, &[rdot, c(1e-3)]), 1e-4);
    rep.record("flow_rbar_fd", fa, Some(n), rel_to(rate.drbar - rbdot, &[rbdot, c(1e-3)]), 1e-4);
    let fda: Vec<f64> = (0..st.a.len())
        .map(|j| mat_rel(&((stp.a[j] - stm.a[j]) / c(2.0 * h)), &rate.da[j]))
        .collect();
    rep.record_max("flow_residues_fd", fa, Some(n), fda, 1e-4);
    let dinf = commutator(&rate.b_inf, &(-st.a.iter().fold(Mat2::zeros(), |acc, m| acc + m)));
    let dinf_sum = -rate.da.iter().fold(Mat2::zeros(), |acc, m| acc + m);
    rep.record("a_inf_commutator", fa, Some(n), mat_rel(&dinf, &dinf_sum), cfg.identity_tol);
    rep.record("b_inf_21", fa, Some(n), rel_to(rate.b_inf[(1, 0)] - (pbdot * k + kdot * pb) / (k * k), &[rate.b_inf[(1, 0)], c(1e-3)]), 1e-4);

    // component forms against the matrix form
    rep.merge(verify_components(&ev, &set, &st, &rate, &zd, n, cfg.identity_tol)?);

    // Ẏ = B_n Y and K̇ = B_{n+1}K − K B_n at sample points
    let (st1, _) = rebuild(base, traj, n + 1, n + 2, t, cfg)?;
    let rate1 = schlesinger_rhs(&st1, &zd)?;
    let bz = |b: &Mat2, s: &DeformState, z: C64| {
        let mut out = *b;
        for j in 0..s.z.len() {
            if zd[j].norm() > 0.0 {
                out -= s.a[j] * (zd[j] / (z - s.z[j]));
            }
        }
        out
    };
    let (mut yr, mut kr, mut wr) = (Vec::new(), Vec::new(), Vec::new());
    for &z in zs {
        let side = Side::of(z);
        let ydot = (assemble_y_on(&evp, n, z, side)? - assemble_y_on(&evm, n, z, side)?) / c(2.0 * h);
        let b = bz(&rate.b_inf, &st, z);
        yr.push(mat_rel(&ydot, &(b * assemble_y_on(&ev, n, z, side)?)));
        let kdot_m = (assemble_k(&evp, n, z) - assemble_k(&evm, n, z)) / c(2.0 * h);
        let kk = assemble_k(&ev, n, z);
        kr.push(mat_rel(&kdot_m, &(bz(&rate1.b_inf, &st1, z) * kk - kk * b)));
        let wp = traj.weight_at(base, t + h).eval(z)?;
        let wm = traj.weight_at(base, t - h).eval(z)?;
        let wl = (wp - wm) / (2.0 * h) / w.eval(z)?;
        let want: C64 = w.singularities.iter().zip(&zd).map(|(sg, &d)| -sg.rho * d / (z - sg.z)).sum();
        wr.push(rel_to(wl - want, &[want, c(1e-3)]));
    }
    rep.record_max("y_time_derivative", "deform:time-derivatives", Some(n), yr, cfg.fd_tol);
    rep.record_max("k_time_compatibility", "deform:time-derivatives", Some(n), kr, 1e-6);
    rep.record_max("weight_log_rate", "deform:weight-rate", Some(n), wr, cfg.fd_tol);
    let _ = stm;
    Ok(rep)
}

/// Entry forms of the Schlesinger equations written with the coefficient
/// functions, against the matrix commutator form.
fn verify_components(ev: &Evaluator, set: &CoeffSet, st: &DeformState, rate: &StateRate, zd: &[C64], n: usize, tol: f64) -> Result<IdentityReport> {
    let s = &ev.sys;
    let (k, k1, p1, pb1) = (s.kappa(n), s.kappa(n + 1), s.p(n + 1), s.pb(n + 1));
    let kdk = rate.b_inf[(0, 0)];
    let dkpb = rate.b_inf[(1, 0)] * k * k;
    let m = st.z.len();
    let g: Vec<C64> = (0..m).map(|j| st.rho[j] / (set.v(st.z[j]) * 2.0)).collect();
    let (th, ths, om, oms): (Vec<C64>, Vec<C64>, Vec<C64>, Vec<C64>) = (
        st.z.iter().map(|&z| set.th(n, z)).collect(),
        st.z.iter().map(|&z| set.ths(n, z)).collect(),
        st.z.iter().map(|&z| set.om(n, z)).collect(),
        st.z.iter().map(|&z| set.oms(n, z)).collect(),
    );
    let kr = k1 / k;
    // half the diagonal difference; equals Ω − (κ_{n+1}/κ_n)zΘ away from the origin
    let lam: Vec<C64> = (0..m)
        .map(|j| (om[j] - kr * st.z[j] * th[j] + oms[j] - kr * ths[j]) * 0.5)
        .collect();
    let (mut ra, mut rb, mut rc) = (Vec::new(), Vec::new(), Vec::new());
    for j in 0..m {
        let zj = st.z[j];
        let (mut sa, mut sb, mut sc) = (c(0.0), c(0.0), c(0.0));
        for kk in 0..m {
            if kk == j || zd[j] == zd[kk] {
                continue;
            }
            let zk = st.z[kk];
            let f = g[kk] * (zd[j] - zd[kk]) / (zj - zk);
            sa += f * (zk * ths[kk] * th[j] - zj * th[kk] * ths[j]);
            sb += f * (th[kk] * lam[j] - th[j] * lam[kk]);
            sc += f * (zk * ths[kk] * lam[j] - zj * ths[j] * lam[kk]);
        }
        let a = g[j] * p1 / (k * k * k) * dkpb * th[j] - g[j] * p1 * pb1 / (k * k) * sa;
        let b = g[j] * 2.0 * p1 / k * (kdk * th[j] + sb);
        let cc = g[j] * 2.0 * pb1 / k * (-kdk * zj * ths[j] + dkpb / (k * pb1) * lam[j] - sc);
        let da = rate.da[j];
        ra.push(rel_to(a + da[(0, 0)], &[a, da[(0, 0)], c(1e-3)]));
        rb.push(rel_to(b - da[(0, 1)], &[b, da[(0, 1)], c(1e-3)]));
        rc.push(rel_to(cc + da[(1, 0)], &[cc, da[(1, 0)], c(1e-3)]));
    }
    let mut rep = IdentityReport::new("deform_components");
    let an = "deform:schlesinger-components";
    rep.record_max("schlesinger_component_a", an, Some(n), ra, tol);
    rep.record_max("schlesinger_component_b", an, Some(n), rb, tol);
    rep.record_max("schlesinger_component_c", an, Some(n), rc, tol);
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    /// 0-based singularity index
    pub j: usize,
    pub rho: C64,
    pub ring_radius: f64,
    /// (t, C_j(t))
    pub c: Vec<(f64, C64)>,
    pub drift: f64,
    pub fit_residual: f64,
    /// C_j from a finer ring fit at the first time
    pub refined_c: C64,
    pub monodromy: [[C64; 2]; 2],
    /// false when Re ρ_j ≤ 0, in which case constancy is not asserted
    pub asserted: bool,
}

/// Ring radius: a third of the distance to the nearest other singularity or 𝕋.
pub fn ring_radius(w: &SemiClassicalWeight, j: usize) -> f64 {
    let zj = w.singularities[j].z;
    let mut d = (zj.norm() - 1.0).abs();
    for (k, s) in w.singularities.iter().enumerate() {
        if k != j {
            d = d.min((s.z - zj).norm());
        }
    }
    d / 3.0
}

/// Least-squares fit F(z) ≈ Σ_{l≤L} a_l (z−z_j)^l + C w(z) on a ring around z_j,
/// with F taken on the side of 𝕋 that contains z_j.
pub fn extract_connection(ev: &Evaluator, w: &SemiClassicalWeight, j: usize, radius: f64, degree: usize, points: usize) -> Result<(C64, f64)> {
    let zj = w.singularities[j].z;
    if radius <= 0.0 || radius >= (zj.norm() - 1.0).abs() {
        return Err(Error::Geometry(format!("ring of radius {radius} around {zj} meets the unit circle; try {}", ring_radius(w, j))));
    }
    for (k, s) in w.singularities.iter().enumerate() {
        if k != j && (s.z - zj).norm() <= radius {
            return Err(Error::Geometry(format!("ring of radius {radius} encloses singularity {}; try {}", k + 1, ring_radius(w, j))));
        }
    }
    let side = Side::of(zj);
    let ring: Vec<C64> = circle_nodes(radius, points, 0.5).into_iter().map(|u| zj + u).collect();
    let cols = degree + 2;
    let mut a = DMatrix::from_element(points, cols, c(0.0));
    let mut b = DVector::from_element(points, c(0.0));
    for (i, &z) in ring.iter().enumerate() {
        let u = (z - zj) / radius;
        let mut pw = c(1.0);
        for l in 0..=degree {
            a[(i, l)] = pw;
            pw *= u;
        }
        a[(i, degree + 1)] = w.eval(z)?;
        b[i] = caratheodory_on(ev.moments(), z, side).value;
    }
    let x = lstsq(&a, &b);
    let res = (&a * &x - &b).norm() / b.norm().max(1e-300);
    let sv = a.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min().max(1e-300);
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::Geometry(format!("ring fit is ill-conditioned (cond {cond:.1e}); try radius {}", ring_radius(w, j))));
    }
    Ok((x[degree + 1], res))
}

/// C_j along a rebuilt trajectory at `samples` equispaced times.
pub fn isomonodromy_check(base: &SemiClassicalWeight, traj: &Trajectory, j: usize, samples: usize, cfg: &Config) -> Result<MonodromyReport> {
    traj.validate(base)?;
    let rho = base.singularities[j].rho;
    let mut cs = Vec::new();
    let mut worst = 0.0f64;
    let mut radius = f64::INFINITY;
    let times: Vec<f64> = (0..samples.max(1)).map(|q| traj.t_span.0 + traj.duration() * q as f64 / (samples.max(2) - 1) as f64).collect();
    for &t in &times {
        let w = traj.weight_at(base, t);
        radius = radius.min(ring_radius(&w, j));
    }
    let mut refined = c(0.0);
    for (qi, &t) in times.iter().enumerate() {
        let w = traj.weight_at(base, t);
        let tbl = weight_moments(&w, cfg.window, cfg)?;
        let sys = build_system(&tbl, 1, BuildMethod::GramLu, cfg)?;
        let ev = Evaluator::new(sys, Some(w.clone()), cfg)?;
        let (cj, res) = extract_connection(&ev, &w, j, radius, 6, 48)?;
        if qi == 0 {
            refined = extract_connection(&ev, &w, j, radius, 8, 96)?.0;
        }
        worst = worst.max(res);
        cs.push((t, cj));
    }
    let c0 = cs[0].1;
    let drift = cs.iter().map(|(_, x)| (x - c0).norm()).fold(0.0, f64::max);
    let e = (C64::new(0.0, -2.0 * PI) * rho).exp();
    Ok(MonodromyReport {
        j,
        rho,
        ring_radius: radius,
        c: cs,
        drift,
        fit_residual: worst,
        refined_c: refined,
        monodromy: [[c(1.0), c0 * (c(1.0) - e)], [c(0.0), e]],
        asserted: rho.re > 0.0,
    })
}

pub fn monodromy_identities(mr: &MonodromyReport, tol: f64) -> IdentityReport {
    let mut rep = IdentityReport::new("deform_monodromy");
    let a = "deform:monodromy";
    let n = None;
    if mr.asserted {
        rep.record(&format!("connection_drift_{}", mr.j + 1), a, n, mr.drift, tol);
        rep.record(&format!("connection_refinement_{}", mr.j + 1), a, n, (mr.refined_c - mr.c[0].1).norm(), 1e-7);
    } else {
        rep.note(format!("singularity {} has Re rho <= 0; drift {:.3e} reported, not asserted", mr.j + 1, mr.drift));
    }
    let e = (C64::new(0.0, -2.0 * PI) * mr.rho).exp();
    rep.record(&format!("monodromy_22_{}", mr.j + 1), a, n, rel(mr.monodromy[1][1], e), 1e-14);
    rep.record(&format!("monodromy_lower_{}", mr.j + 1), a, n, mr.monodromy[1][0].norm(), 0.0);
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::Singularity;

    fn strict() -> SemiClassicalWeight {
        SemiClassicalWeight::new(
            vec![Singularity::real(0.0, -1.0), Singularity::real(2.0, 0.5), Singularity::real(3.0, 1.0 / 3.0)],
            true,
        )
    }

    #[test]
    fn trajectory_json() {
        let t = Trajectory::from_json(r#"{"j":2,"path":"linear","from":[2,0],"to":[2.1,0]}"#).unwrap();
        assert_eq!(t.j, 1);
        assert!((t.z(0.5) - C64::new(2.05, 0.0)).norm() < 1e-15);
        assert!(Trajectory::from_json(r#"{"j":2,"path":"spiral","from":[2,0],"to":[2.1,0]}"#).is_err());
    }

    #[test]
    fn frozen_flow_has_zero_rates() {
        let cfg = Config::default();
        let w = strict();
        let traj = Trajectory { j: 1, from: C64::new(2.0, 0.0), to: C64::new(2.0, 0.0), t_span: (0.0, 0.1) };
        let (s, _) = rebuild(&w, &traj, 2, 2, 0.0, &cfg).unwrap();
        let r = schlesinger_rhs(&s, &traj.zdots(3)).unwrap();
        assert_eq!(r.dkappa, c(0.0));
        assert!(r.da.iter().all(|m| max_entry(m) == 0.0));
        assert_eq!(run_rk4(&s, &Trajectory { t_span: (0.0, 0.0), ..traj }, 8).unwrap().len(), 1);
    }

    #[test]
    fn origin_move_rejected() {
        let w = strict();
        let traj = Trajectory { j: 0, from: c(0.0), to: C64::new(0.1, 0.0), t_span: (0.0, 1.0) };
        assert!(traj.validate(&w).is_err());
    }
}
