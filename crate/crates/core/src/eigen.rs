//! Self-adjoint eigendecompositions, delegated to faer.
//!
//! nalgebra's `SymmetricEigen` reconstructs some of the lattice and
//! two-particle matrices used here only to ~1e-8, which is too loose for
//! the 1e-10 comparisons downstream. faer's solver is accurate to a few ulp.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a real
/// symmetric matrix. Only the lower triangle is read.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let a = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = a.self_adjoint_eigen(Side::Lower).expect("symmetric eigendecomposition converges");
    let s = evd.S().column_vector();
    let u = evd.U();
    (DVector::from_fn(n, |i, _| s[i]), DMatrix::from_fn(n, n, |i, j| u[(i, j)]))
}

/// Eigenvalues (ascending) of a Hermitian matrix. Only the lower triangle is read.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let a = Mat::<Complex64>::from_fn(n, n, |i, j| m[(i, j)]);
    a.self_adjoint_eigenvalues(Side::Lower).expect("Hermitian eigendecomposition converges")
}
