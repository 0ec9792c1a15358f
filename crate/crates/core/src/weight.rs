//! Regular semi-classical weights w(z) = ∏ (z − z_j)^{ρ_j}.
//!
//! Branch convention: a factor with an integer exponent is evaluated as an
//! exact integer power. A non-integer factor with |z_j| ≥ 1 has its cut on the
//! ray running radially outward from z_j, and matches the principal power at
//! z = 0. A non-integer factor with 0 < |z_j| < 1 is written as
//! z^{ρ_j}(1 − z_j/z)^{ρ_j}: the second factor is principal, with its cut on
//! the segment [0, z_j], and the z^{ρ_j} parts are merged into the origin
//! factor. That merged exponent must be an integer for w to be single-valued
//! on the unit circle.

use crate::error::{Error, Result};
use crate::moments::{MomentSource, MomentTable};
use crate::poly::Poly;
use crate::C64;
use serde::{Deserialize, Serialize};

const INT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub z: C64,
    pub rho: C64,
}

impl Singularity {
    pub fn new(z: C64, rho: C64) -> Self {
        Singularity { z, rho }
    }

    pub fn real(z: f64, rho: f64) -> Self {
        Singularity::new(C64::new(z, 0.0), C64::new(rho, 0.0))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchConvention {
    #[default]
    Radial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiClassicalWeight {
    pub singularities: Vec<Singularity>,
    #[serde(default = "default_annulus")]
    pub annulus: (f64, f64),
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub branch: BranchConvention,
}

fn default_annulus() -> (f64, f64) {
    (0.5, 2.0)
}

/// W monic with the singularities as roots; V from 2V/W = Σ ρ_j/(z − z_j).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyPair {
    pub w: Poly,
    pub v: Poly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub strict: bool,
    pub conditions: Vec<Condition>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.conditions.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

fn as_integer(rho: C64) -> Option<i32> {
    let k = rho.re.round();
    ((rho.re - k).abs() <= INT_TOL && rho.im.abs() <= INT_TOL && k.abs() < 1e9).then_some(k as i32)
}

fn on_negative_axis(u: C64) -> bool {
    u.re < 0.0 && u.im.abs() <= 1e-15 * u.norm()
}

impl SemiClassicalWeight {
    pub fn new(singularities: Vec<Singularity>, strict: bool) -> Self {
        SemiClassicalWeight {
            singularities,
            annulus: default_annulus(),
            strict,
            branch: BranchConvention::Radial,
        }
    }

    pub fn m(&self) -> usize {
        self.singularities.len()
    }

    pub fn locations(&self) -> Vec<C64> {
        self.singularities.iter().map(|s| s.z).collect()
    }

    pub fn exponents(&self) -> Vec<C64> {
        self.singularities.iter().map(|s| s.rho).collect()
    }

    pub fn rho_sum(&self) -> C64 {
        self.singularities.iter().map(|s| s.rho).sum()
    }

    /// Total exponent carried by the origin after the inside factors are
    /// rewritten as z^{ρ_j}(1 − z_j/z)^{ρ_j}.
    pub fn origin_exponent(&self) -> C64 {
        self.singularities
            .iter()
            .filter(|s| s.z.norm() < 1.0)
            .map(|s| s.rho)
            .sum()
    }

    pub fn with_location(&self, j: usize, z: C64) -> Self {
        let mut w = self.clone();
        w.singularities[j].z = z;
        w
    }

    /// Evaluate w(z) under the radial branch convention.
    pub fn eval(&self, z: C64) -> Result<C64> {
        let mut out = C64::new(1.0, 0.0);
        let mut origin = C64::new(0.0, 0.0);
        for (i, s) in self.singularities.iter().enumerate() {
            let zj = s.z;
            if zj == C64::new(0.0, 0.0) {
                origin += s.rho;
                continue;
            }
            let d = z - zj;
            if d == C64::new(0.0, 0.0) {
                if s.rho.re > 0.0 {
                    return Ok(C64::new(0.0, 0.0));
                }
                return Err(Error::Pole { index: i, z });
            }
            if let Some(k) = as_integer(s.rho) {
                out *= d.powi(k);
            } else if zj.norm() >= 1.0 {
                let dir = zj / zj.norm();
                let u = d / (-dir);
                if on_negative_axis(u) {
                    return Err(Error::BranchCut { index: i, z });
                }
                // arg(−dir) taken in (−π, π] without going through a signed zero
                let mut base = dir.arg() + std::f64::consts::PI;
                if base > std::f64::consts::PI {
                    base -= 2.0 * std::f64::consts::PI;
                }
                let lg = C64::new(d.norm().ln(), base + u.arg());
                out *= (s.rho * lg).exp();
            } else {
                origin += s.rho;
                let t = C64::new(1.0, 0.0) - zj / z;
                if on_negative_axis(t) {
                    return Err(Error::BranchCut { index: i, z });
                }
                out *= (s.rho * t.ln()).exp();
            }
        }
        if origin != C64::new(0.0, 0.0) {
            if z == C64::new(0.0, 0.0) {
                if origin.re > 0.0 {
                    return Ok(C64::new(0.0, 0.0));
                }
                return Err(Error::Pole { index: 0, z });
            }
            match as_integer(origin) {
                Some(k) => out *= z.powi(k),
                None => {
                    if on_negative_axis(z) {
                        return Err(Error::BranchCut { index: 0, z });
                    }
                    out *= (origin * z.ln()).exp();
                }
            }
        }
        Ok(out)
    }

    /// w'/w = Σ ρ_j/(z − z_j).
    pub fn log_derivative(&self, z: C64) -> C64 {
        self.singularities.iter().map(|s| s.rho / (z - s.z)).sum()
    }
}

/// Check every structural condition on a weight. Duplicate locations and a
/// missing origin are hard errors in both modes; in strict mode any failed
/// condition is an error, in relaxed mode failures are only reported.
pub fn validate_weight(spec: &SemiClassicalWeight, strict: bool) -> Result<ValidationReport> {
    let s = &spec.singularities;
    for i in 0..s.len() {
        for j in 0..i {
            if (s[i].z - s[j].z).norm() <= 1e-14 * (1.0 + s[i].z.norm()) {
                return Err(Error::DuplicateLocation(s[i].z));
            }
        }
    }
    if s.first().map(|x| x.z) != Some(C64::new(0.0, 0.0)) {
        return Err(Error::MissingOrigin);
    }
    let mut conds = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| {
        conds.push(Condition { name: name.into(), pass, detail })
    };
    push("degree_w_at_least_2", s.len() >= 2, format!("m = {}", s.len()));
    push("origin_singularity", true, "singularities[0] at z = 0".into());
    push("distinct_locations", true, "pairwise distinct".into());
    let bad: Vec<usize> = s
        .iter()
        .enumerate()
        .filter(|(_, x)| as_integer(x.rho).is_some_and(|k| k >= 0))
        .map(|(i, _)| i + 1)
        .collect();
    push(
        "exponents_not_nonnegative_integers",
        bad.is_empty(),
        if bad.is_empty() { "ok".into() } else { format!("violated at j = {bad:?}") },
    );
    let org = spec.origin_exponent();
    push(
        "single_valued_on_circle",
        as_integer(org).is_some(),
        format!("total inside exponent {org}"),
    );
    let (d1, d2) = spec.annulus;
    push("annulus_brackets_circle", d1 > 0.0 && d1 < 1.0 && 1.0 < d2, format!("({d1}, {d2})"));
    let report = ValidationReport { strict, conditions: conds };
    if strict && !report.all_pass() {
        return Err(Error::Validation(format!("failed conditions: {:?}", report.failed())));
    }
    Ok(report)
}

pub fn build_vw(spec: &SemiClassicalWeight) -> PolyPair {
    let zs = spec.locations();
    let w = Poly::from_roots(&zs);
    let mut two_v = Poly::constant(C64::new(0.0, 0.0));
    for (j, s) in spec.singularities.iter().enumerate() {
        let others: Vec<C64> = zs.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &z)| z).collect();
        two_v = &two_v + &Poly::from_roots(&others).scale(s.rho);
    }
    PolyPair { w, v: two_v.scale(C64::new(0.5, 0.0)) }
}

/// Max over j of |2V(z_j) − ρ_j W'(z_j)| / (1 + |ρ_j W'(z_j)|).
pub fn vw_residue_defect(spec: &SemiClassicalWeight, vw: &PolyPair) -> f64 {
    let wd = vw.w.deriv();
    spec.singularities
        .iter()
        .map(|s| {
            let t = s.rho * wd.eval(s.z);
            (vw.v.eval(s.z) * 2.0 - t).norm() / (1.0 + t.norm())
        })
        .fold(0.0, f64::max)
}

/// Relative residual of W w' − 2V w with w' from central differences.
pub fn ode_residual(spec: &SemiClassicalWeight, vw: &PolyPair, z: C64, h: f64) -> Result<f64> {
    let dw = (spec.eval(z + h)? - spec.eval(z - h)?) / (2.0 * h);
    let lhs = vw.w.eval(z) * dw;
    let rhs = vw.v.eval(z) * 2.0 * spec.eval(z)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE))
}

/// Either a singularity-list weight or raw moments.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Singular(SemiClassicalWeight),
    Moments(MomentTable),
}

#[derive(Deserialize)]
struct RawSpec {
    singularities: Option<Vec<Singularity>>,
    moments: Option<Vec<(i64, f64, f64)>>,
    /// for the moments form: every |k| ≤ window not listed is zero
    window: Option<usize>,
    #[serde(default)]
    strict: bool,
    annulus: Option<(f64, f64)>,
    #[serde(default)]
    branch: BranchConvention,
}

impl WeightSpec {
    pub fn from_json(text: &str) -> Result<WeightSpec> {
        let raw: RawSpec = serde_json::from_str(text)?;
        match (raw.singularities, raw.moments) {
            (Some(_), Some(_)) => Err(Error::Input(
                "weight spec has both `singularities` and `moments`; supply exactly one".into(),
            )),
            (None, None) => Err(Error::Input("weight spec needs `singularities` or `moments`".into())),
            (Some(s), None) => Ok(WeightSpec::Singular(SemiClassicalWeight {
                singularities: s,
                annulus: raw.annulus.unwrap_or_else(default_annulus),
                strict: raw.strict,
                branch: raw.branch,
            })),
            (None, Some(m)) => {
                let pairs: Vec<(i64, C64)> = m.into_iter().map(|(k, re, im)| (k, C64::new(re, im))).collect();
                Ok(WeightSpec::Moments(MomentTable::from_pairs(&pairs, raw.window, MomentSource::UserSupplied)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strict_weight() -> SemiClassicalWeight {
        SemiClassicalWeight::new(
            vec![Singularity::real(0.0, -1.0), Singularity::real(2.0, 0.5), Singularity::real(3.0, 1.0 / 3.0)],
            true,
        )
    }

    #[test]
    fn validation_examples() {
        assert!(validate_weight(&strict_weight(), true).unwrap().all_pass());
        let w = SemiClassicalWeight::new(vec![Singularity::real(0.0, -1.0), Singularity::real(-1.0, 2.0)], true);
        assert!(matches!(validate_weight(&w, true), Err(Error::Validation(_))));
        let rep = validate_weight(&w, false).unwrap();
        assert_eq!(rep.failed(), vec!["exponents_not_nonnegative_integers"]);
        let dup = SemiClassicalWeight::new(vec![Singularity::real(0.0, -1.0), Singularity::real(0.0, 0.5)], false);
        assert!(matches!(validate_weight(&dup, false), Err(Error::DuplicateLocation(_))));
        let no0 = SemiClassicalWeight::new(vec![Singularity::real(1.5, -1.0), Singularity::real(2.0, 0.5)], false);
        assert!(matches!(validate_weight(&no0, false), Err(Error::MissingOrigin)));
    }

    #[test]
    fn eval_examples() {
        let one = C64::new(1.0, 0.0);
        let flat = SemiClassicalWeight::new(vec![Singularity::real(0.0, 0.0), Singularity::real(3.0, 0.0)], false);
        assert_eq!(flat.eval(C64::new(0.3, 0.7)).unwrap(), one);
        let lau = SemiClassicalWeight::new(vec![Singularity::real(0.0, -1.0), Singularity::real(-1.0, 2.0)], false);
        assert!((lau.eval(one).unwrap() - 4.0).norm() < 1e-15);
        let sq = SemiClassicalWeight::new(vec![Singularity::real(0.0, -1.0), Singularity::real(2.0, 0.5)], false);
        assert!((sq.eval(one).unwrap() - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(matches!(sq.eval(C64::new(0.0, 0.0)), Err(Error::Pole { .. })));
        assert!(matches!(sq.eval(C64::new(2.5, 0.0)), Err(Error::BranchCut { index: 1, .. })));
    }

    #[test]
    fn vw_examples() {
        let lau = SemiClassicalWeight::new(vec![Singularity::real(0.0, -1.0), Singularity::real(-1.0, 2.0)], false);
        let vw = build_vw(&lau);
        let c = |x: f64| C64::new(x, 0.0);
        assert_eq!(vw.w.coeffs, vec![c(0.0), c(1.0), c(1.0)]);
        assert!((vw.v.coeff(0) + 0.5).norm() < 1e-15 && (vw.v.coeff(1) - 0.5).norm() < 1e-15);
        let s = strict_weight();
        let vw = build_vw(&s);
        assert_eq!(vw.w.degree(), 3);
        assert!(vw.v.degree() <= 2);
        assert!((vw.v.eval(c(0.0)) * 2.0 / vw.w.deriv().eval(c(0.0)) + 1.0).norm() < 1e-14);
        assert!(vw_residue_defect(&s, &vw) < 1e-14);
    }

    #[test]
    fn inside_singularity_single_valued() {
        // z^{-1} (z - 0.4)^{1/2} (z - 2.5)^{1/2}: inside exponent -1/2, not integer
        let bad = SemiClassicalWeight::new(
            vec![Singularity::real(0.0, -1.0), Singularity::real(0.4, 0.5), Singularity::real(2.5, 0.5)],
            false,
        );
        let rep = validate_weight(&bad, false).unwrap();
        assert!(rep.failed().contains(&"single_valued_on_circle"));
        // z^{-1/2} (z - 0.4)^{1/2}: inside exponent 0 -> continuous across θ = π
        let good = SemiClassicalWeight::new(
            vec![Singularity::real(0.0, -0.5), Singularity::real(0.4, 0.5), Singularity::real(2.5, -0.5)],
            false,
        );
        assert!(validate_weight(&good, false).unwrap().all_pass());
        let e = 1e-9;
        let a = good.eval(C64::from_polar(1.0, std::f64::consts::PI * (1.0 - e))).unwrap();
        let b = good.eval(C64::from_polar(1.0, -std::f64::consts::PI * (1.0 - e))).unwrap();
        assert!((a - b).norm() < 1e-7);
    }

    #[test]
    fn spec_json_forms() {
        let s = r#"{"singularities":[{"z":[0,0],"rho":[-1,0]},{"z":[2,0],"rho":[0.5,0]}],"strict":true}"#;
        assert!(matches!(WeightSpec::from_json(s).unwrap(), WeightSpec::Singular(_)));
        let m = r#"{"moments":[[0,1,0]]}"#;
        assert!(matches!(WeightSpec::from_json(m).unwrap(), WeightSpec::Moments(_)));
        let both = r#"{"moments":[[0,1,0]],"singularities":[]}"#;
        assert!(matches!(WeightSpec::from_json(both), Err(Error::Input(_))));
    }
}
