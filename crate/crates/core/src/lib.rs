//! Bi-orthogonal polynomial systems on the unit circle.
//!
//! The crate builds the system {φ_n, φ*_n} for a weight given either by its
//! trigonometric moments or, for regular semi-classical weights, by the
//! singularity data (z_j, ρ_j) of w(z) = ∏(z−z_j)^{ρ_j}. On top of the system
//! it computes the associated functions, the coefficient functions Θ, Θ*, Ω,
//! Ω*, the Lax/residue matrices and integrates the Schlesinger flow obtained
//! by moving the singularities. Every derived object comes with a checker
//! that reports residuals of the identities it is expected to satisfy.

pub mod assoc;
pub mod bops;
pub mod coeffs;
pub mod config;
pub mod deform;
pub mod error;
pub mod lax;
pub mod linalg;
pub mod moments;
pub mod poly;
pub mod quadrature;
pub mod report;
pub mod samples;
pub mod suites;
pub mod weight;

pub use num_complex::Complex64 as C64;

pub use assoc::{AssocLevel, AssocSet, Evaluator, Side};
pub use bops::{BopsLevel, BopsSystem, BuildMethod};
pub use coeffs::{CoeffQuad, CoeffSet};
pub use config::Config;
pub use deform::{DeformState, MonodromyReport, Trajectory};
pub use error::{Error, Result};
pub use lax::{Mat2, ResidueSet};
pub use moments::{MomentSource, MomentTable};
pub use poly::Poly;
pub use report::{IdentityEntry, IdentityReport};
pub use weight::{PolyPair, SemiClassicalWeight, Singularity, WeightSpec};
