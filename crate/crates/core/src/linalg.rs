//! Thin wrappers over nalgebra for the dense complex linear algebra we need.

use crate::C64;
use nalgebra::{DMatrix, DVector};

pub fn det(m: DMatrix<C64>) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.lu().determinant()
}

pub fn solve(m: DMatrix<C64>, b: &DVector<C64>) -> Option<DVector<C64>> {
    m.lu().solve(b)
}

/// Least squares by Householder QR; falls back to the SVD when R is singular.
pub fn lstsq(a: &DMatrix<C64>, b: &DVector<C64>) -> DVector<C64> {
    if a.nrows() >= a.ncols() {
        let qr = a.clone().qr();
        let rhs = qr.q().adjoint() * b;
        if let Some(x) = qr.r().solve_upper_triangular(&rhs) {
            return x;
        }
    }
    a.clone()
        .svd(true, true)
        .solve(b, 1e-300)
        .expect("svd computed with both factors")
}

/// Product of Euclidean row norms, the Hadamard bound on |det m|.
pub fn hadamard_bound(m: &DMatrix<C64>) -> f64 {
    m.row_iter().map(|r| r.norm()).product()
}
