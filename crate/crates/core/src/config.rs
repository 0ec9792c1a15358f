//! Central tolerance and numerical-parameter record.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// relative floor for |I0_n| against the Hadamard bound
    pub existence_floor: f64,
    /// series evaluators refuse | |z|-1 | below this
    pub near_circle: f64,
    pub quad_start: usize,
    pub quad_cap: usize,
    pub quad_tol: f64,
    /// moment window K
    pub window: usize,
    pub method_agreement: f64,
    pub fit_residual: f64,
    pub degree_cert: f64,
    /// tolerance for identity checks that do not involve finite differences
    pub identity_tol: f64,
    /// tolerance for finite-difference limited checks
    pub fd_tol: f64,
    /// radius of the coefficient-function sampling circle
    pub fit_radius: f64,
    pub fit_points: usize,
    /// step of plain central differences in verification checks
    pub fd_step: f64,
    pub rhp_offset: f64,
    pub flow_tol: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            existence_floor: 1e-13,
            near_circle: 1e-3,
            quad_start: 256,
            quad_cap: 1 << 20,
            quad_tol: 1e-14,
            window: 128,
            method_agreement: 1e-8,
            fit_residual: 1e-6,
            degree_cert: 1e-7,
            identity_tol: 1e-6,
            fd_tol: 1e-5,
            fit_radius: 0.5,
            fit_points: 16,
            fd_step: 1e-6,
            rhp_offset: 1e-4,
            flow_tol: 1e-7,
            seed: 7,
        }
    }
}
