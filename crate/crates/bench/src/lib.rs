//! Shared fixtures for the pipeline benchmarks.

use biorth::suites::{laurent_moments, strict_weight};
use biorth::{Config, MomentTable, SemiClassicalWeight};

pub fn strict() -> SemiClassicalWeight {
    strict_weight()
}

pub fn strict_moments(cfg: &Config) -> MomentTable {
    biorth::moments::weight_moments(&strict_weight(), cfg.window, cfg).expect("moments of the strict weight")
}

pub fn laurent(window: usize) -> MomentTable {
    laurent_moments(window)
}
