//! Residual reports. Every checked identity becomes one entry carrying a
//! stable anchor id so a failure can be traced back to the identity that
//! produced it.

use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityEntry {
    pub id: String,
    pub anchor: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub schema: String,
    pub suite: String,
    pub entries: Vec<IdentityEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl IdentityReport {
    pub fn new(suite: &str) -> Self {
        IdentityReport {
            schema: SCHEMA.into(),
            suite: suite.into(),
            entries: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Record a residual. NaN residuals always fail.
    pub fn record(&mut self, id: &str, anchor: &str, n: Option<usize>, residual: f64, tol: f64) {
        let pass = residual.is_finite() && residual <= tol;
        self.entries.push(IdentityEntry {
            id: id.into(),
            anchor: anchor.into(),
            n,
            residual,
            tol,
            pass,
        });
    }

    /// Record the max of several residuals under one id.
    pub fn record_max<I: IntoIterator<Item = f64>>(&mut self, id: &str, anchor: &str, n: Option<usize>, it: I, tol: f64) {
        let r = it.into_iter().fold(0.0f64, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) });
        self.record(id, anchor, n, r, tol);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn merge(&mut self, other: IdentityReport) {
        self.entries.extend(other.entries);
        self.notes.extend(other.notes);
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> Vec<&IdentityEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }

    /// Largest residual/tol over all entries; above 1 means some entry failed.
    pub fn worst_ratio(&self) -> f64 {
        self.entries.iter().map(|e| if e.residual.is_finite() { e.residual / e.tol } else { f64::INFINITY }).fold(0.0, f64::max)
    }

    pub fn get(&self, id: &str) -> Option<&IdentityEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// |a − b| scaled by the larger magnitude (or 1 when both are small).
pub fn rel(a: num_complex::Complex64, b: num_complex::Complex64) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

/// |r| relative to the largest of the supplied scales, floored at 1.
pub fn rel_to(r: num_complex::Complex64, scales: &[num_complex::Complex64]) -> f64 {
    r.norm() / scales.iter().map(|s| s.norm()).fold(1.0, f64::max)
}
