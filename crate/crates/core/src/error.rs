use crate::C64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate singularity location {0}")]
    DuplicateLocation(C64),
    #[error("no singularity at the origin; singularities[0] must be located at z = 0")]
    MissingOrigin,
    #[error("weight rejected by validation: {0}")]
    Validation(String),
    #[error("pole of the weight at singularity {index} (z = {z})")]
    Pole { index: usize, z: C64 },
    #[error("z = {z} lies on the branch cut of singularity {index}")]
    BranchCut { index: usize, z: C64 },
    #[error("|z| = {0} is within the near-circle exclusion zone; pick a side explicitly")]
    NearCircle(f64),
    #[error("moment quadrature did not converge with {points} points (last change {residual:e})")]
    QuadratureNonConvergence { points: usize, residual: f64 },
    #[error("moment window K = {available} too small, need K >= {required}")]
    InsufficientWindow { required: usize, available: usize },
    #[error("bi-orthogonal system does not exist at level {n}: |I0_n| = {value:e} below floor")]
    Existence { n: usize, value: f64 },
    #[error("gram_lu and szego routes disagree by {0:e}")]
    MethodDisagreement(f64),
    #[error("degenerate level {n}: {what}")]
    Degenerate { n: usize, what: String },
    #[error("weight does not behave as semi-classical: fit residual {0:e}")]
    NotSemiClassical(f64),
    #[error("singular residue at singularity {0}: V(z_j) = 0")]
    SingularResidue(usize),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("RK4 step-halving estimate {estimate:e} exceeds tolerance {tol:e}")]
    StepSize { estimate: f64, tol: f64 },
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
