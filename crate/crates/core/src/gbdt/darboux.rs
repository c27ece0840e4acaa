use num_complex::Complex64;
use serde::Serialize;

use super::{GbdtError, GbdtSequence};
use crate::dirac::{fundamental_solution, step_matrix, DiracError, FundamentalTrajectory};
use crate::linalg::{smallest_singular_value, ComplexMatrix, LuFactor, I};

/// `w_α(k, z)` at one `(k, z)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarbouxEvaluation {
    pub k: usize,
    #[serde(serialize_with = "crate::linalg::serialize_complex")]
    pub z: Complex64,
    pub matrix: ComplexMatrix,
}

/// Factored `α − zI`, refused when `σ_min(α − zI)` is below the spectral
/// threshold.
struct Resolvent {
    lu: LuFactor,
}

impl Resolvent {
    fn new(seq: &GbdtSequence, z: Complex64) -> Result<Self, GbdtError> {
        let alpha = seq.alpha();
        let shifted = alpha.shift_diagonal(-z);
        let sigma_min = smallest_singular_value(&shifted)?;
        let threshold = seq.tolerance().spectral_threshold(alpha.frobenius_norm());
        if sigma_min <= threshold {
            return Err(GbdtError::SpectralCollision {
                z,
                sigma_min,
                threshold,
            });
        }
        let lu = LuFactor::new(&shifted, seq.tolerance()).map_err(|_| GbdtError::SpectralCollision {
            z,
            sigma_min,
            threshold,
        })?;
        Ok(Self { lu })
    }

    /// `I − i·Y_k·(α − zI)⁻¹·Λ_k`.
    fn evaluate(&self, seq: &GbdtSequence, k: usize) -> Result<ComplexMatrix, GbdtError> {
        let r = self.lu.solve(seq.lambda(k))?;
        let m = seq.lambda(k).cols();
        Ok(&ComplexMatrix::identity(m) - &(seq.y(k) * &r).scale(I))
    }
}

fn check_nonzero(z: Complex64) -> Result<(), GbdtError> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(GbdtError::ZeroSpectralParameter);
    }
    Ok(())
}

fn check_steps(seq: &GbdtSequence, steps: usize) -> Result<(), GbdtError> {
    if steps > seq.steps() {
        return Err(GbdtError::StepOutOfRange {
            k: steps,
            available: seq.steps(),
        });
    }
    Ok(())
}

/// `w_α(k, z) = I − iΛ_k*S_k⁻¹(α − zI)⁻¹Λ_k`.
pub fn darboux_matrix(seq: &GbdtSequence, k: usize, z: Complex64) -> Result<DarbouxEvaluation, GbdtError> {
    seq.check_index(k)?;
    let matrix = Resolvent::new(seq, z)?.evaluate(seq, k)?;
    Ok(DarbouxEvaluation { k, z, matrix })
}

/// `w_α(k, z)` for `k = 0..=steps`, sharing one factorization of `α − zI`.
pub fn darboux_trajectory(seq: &GbdtSequence, z: Complex64, steps: usize) -> Result<Vec<ComplexMatrix>, GbdtError> {
    check_steps(seq, steps)?;
    let res = Resolvent::new(seq, z)?;
    (0..=steps).map(|k| res.evaluate(seq, k)).collect()
}

/// `‖w_α(k, z)·w_α(k, z̄)* − I‖_F`.
pub fn transfer_inverse_residual(seq: &GbdtSequence, k: usize, z: Complex64) -> Result<f64, GbdtError> {
    let w = darboux_matrix(seq, k, z)?.matrix;
    let w_bar = darboux_matrix(seq, k, z.conj())?.matrix;
    let id = ComplexMatrix::identity(w.rows());
    Ok((&(&w * &w_bar.adjoint()) - &id).frobenius_norm())
}

/// `‖LHS − RHS‖_F / max(1, ‖LHS‖_F)` for
/// `w_α(k+1, z)(I − (i/z)C_k) = (I − (i/z)C̃_k)w_α(k, z)`.
pub fn intertwining_residual(seq: &GbdtSequence, k: usize, z: Complex64) -> Result<f64, GbdtError> {
    check_nonzero(z)?;
    if k >= seq.steps() {
        return Err(GbdtError::StepOutOfRange {
            k,
            available: seq.steps(),
        });
    }
    let res = Resolvent::new(seq, z)?;
    let lhs = &res.evaluate(seq, k + 1)? * &step_matrix(seq.potential().c(k), z, -1.0);
    let rhs = &step_matrix(seq.c_tilde(k), z, -1.0) * &res.evaluate(seq, k)?;
    Ok((&lhs - &rhs).frobenius_norm() / lhs.frobenius_norm().max(1.0))
}

/// `w̃(k+1, z) = (I + (i/z)C̃_k)·w̃(k, z)`, `w̃(0, z) = I`.
pub fn transformed_fundamental_direct(
    seq: &GbdtSequence,
    z: Complex64,
    steps: usize,
) -> Result<FundamentalTrajectory, GbdtError> {
    check_steps(seq, steps)?;
    Ok(FundamentalTrajectory::from_coefficients(
        &seq.c_tilde_all()[..steps],
        seq.potential().signature().m(),
        z,
    )?)
}

/// `w̃(k, z) = w_α(k, −z)·w(k, z)·w_α(0, −z)⁻¹` with the inverse taken as
/// `w_α(0, conj(−z))*`.
pub fn transformed_fundamental_darboux(
    seq: &GbdtSequence,
    z: Complex64,
    steps: usize,
) -> Result<FundamentalTrajectory, GbdtError> {
    check_nonzero(z)?;
    check_steps(seq, steps)?;
    let w = fundamental_solution(seq.potential(), z, steps).map_err(|e| match e {
        DiracError::ZeroSpectralParameter => GbdtError::ZeroSpectralParameter,
        other => GbdtError::Dirac(other),
    })?;
    let wa = darboux_trajectory(seq, -z, steps)?;
    let inv = Resolvent::new(seq, (-z).conj())?.evaluate(seq, 0)?.adjoint();
    let values = wa.iter().zip(&w.values).map(|(a, wk)| &(a * wk) * &inv).collect();
    Ok(FundamentalTrajectory { z, values })
}
