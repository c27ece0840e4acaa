//! Dense complex linear algebra.
//!
//! Everything in the crate is carried by [`ComplexMatrix`], a heap-allocated
//! row-major matrix of `Complex64`. The kernels here are sized for desk-scale
//! problems (dimensions up to a few dozen) and favour accuracy over speed.

mod cholesky;
mod eigen;
mod expm;
mod lu;
mod matrix;
mod random;
mod svd;

pub use cholesky::{cholesky, CholeskyFactor};
pub use eigen::{spectrum_diagnostic, SpectrumEstimate, SPECTRUM_MAX_DIM};
pub use expm::matrix_exponential;
pub use lu::{solve, LuFactor, Solution};
pub use matrix::ComplexMatrix;
pub use random::{complex_gaussian, random_unitary};
pub use svd::{hermitian_eigenvalues, hermitian_sqrt, singular_values, smallest_singular_value};

pub use num_complex::Complex64;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shorthand for the imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },
    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("singular matrix: pivot {pivot} has modulus {modulus:e}")]
    SingularMatrix { pivot: usize, modulus: f64 },
    #[error("matrix is not positive definite: pivot {pivot} is {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("overflow in {op}")]
    Overflow { op: &'static str },
    #[error("{op} did not converge after {iterations} iterations")]
    NoConvergence { op: &'static str, iterations: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Numerical tolerances shared by every check in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerance {
    /// Relative residual bound.
    pub rel: f64,
    /// Absolute floor used for pivots and near-zero residuals.
    pub abs: f64,
    /// Condition estimates above this value are reported as warnings.
    pub cond_warn: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-13,
            cond_warn: 1e12,
        }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, cond_warn: f64) -> std::result::Result<Self, String> {
        let tol = Self { rel, abs, cond_warn };
        tol.check()?;
        Ok(tol)
    }

    pub fn check(&self) -> std::result::Result<(), String> {
        if !(self.rel >= 0.0 && self.rel.is_finite()) {
            return Err(format!("rel must be a finite nonnegative number, got {}", self.rel));
        }
        if !(self.abs >= 0.0 && self.abs.is_finite()) {
            return Err(format!("abs must be a finite nonnegative number, got {}", self.abs));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.cond_warn >= 1.0) {
            return Err(format!("cond_warn must be at least 1, got {}", self.cond_warn));
        }
        Ok(())
    }

    /// Bound applied to a residual accumulated over `k` recursion steps.
    ///
    /// Chains of length `k` lose roughly one unit of `rel` per step, plus a
    /// fixed factor of ten of headroom.
    pub fn step_bound(&self, k: usize) -> f64 {
        10.0 * self.rel * (1 + k) as f64
    }

    /// Distance below which a spectral point is considered to collide with
    /// the spectrum of a matrix of Frobenius norm `scale`.
    pub fn spectral_threshold(&self, scale: f64) -> f64 {
        self.rel * scale.max(self.abs)
    }
}

/// Serialize a scalar as `[re, im]`, matching the matrix encoding.
pub(crate) fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// `‖A − A*‖_F / max(1, ‖A‖_F)`.
pub fn hermitian_residual(a: &ComplexMatrix) -> Result<f64> {
    a.require_square("hermitian_residual")?;
    let diff = a - &a.adjoint();
    Ok(diff.frobenius_norm() / a.frobenius_norm().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_residual_examples() {
        assert_eq!(hermitian_residual(&ComplexMatrix::identity(4)).unwrap(), 0.0);

        // A - A* = [[0,2],[-2,0]], ‖·‖_F = 2√2, ‖A‖_F = √2.
        let rot = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!((hermitian_residual(&rot).unwrap() - 2.0).abs() < 1e-15);

        let c = |re, im| Complex64::new(re, im);
        let a = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(0., 1.)], vec![c(0., 1.), c(0., 0.)]])
            .unwrap();
        assert!((hermitian_residual(&a).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::default().check().is_ok());
        assert!(Tolerance::new(-1.0, 0.0, 1.0).is_err());
        assert!(Tolerance::new(1e-10, 0.0, 0.5).is_err());
        assert!(Tolerance::new(1e-10, f64::NAN, 10.0).is_err());
    }
}
