use serde::Serialize;

use super::darboux::darboux_trajectory;
use super::{transformed_potential, GbdtError, GbdtSequence, Mode};
use crate::dirac::DiracPotential;
use crate::linalg::{cholesky, hermitian_eigenvalues, hermitian_sqrt, ComplexMatrix, I};

/// `C̃_k = W_k*·j·W_k` with `W_k = diag(√q̆_k, √q̂_k)·[B₁; B₂]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitaryFactor {
    pub k: usize,
    pub w_matrix: ComplexMatrix,
    pub q_breve: ComplexMatrix,
    pub q_hat: ComplexMatrix,
    /// `‖A₁ − q̆B₁‖_F / max(1, ‖A₁‖_F)`.
    pub q_breve_residual: f64,
    /// `‖A₂ − q̂B₂‖_F / max(1, ‖A₂‖_F)`.
    pub q_hat_residual: f64,
    pub q_breve_min_eigenvalue: f64,
    pub q_hat_min_eigenvalue: f64,
    /// `‖W_kW_k* − I‖_F`.
    pub unitarity_defect: f64,
    /// `‖W_k*jW_k − C̃_k‖_F`.
    pub representation_defect: f64,
    pub bound: f64,
}

impl UnitaryFactor {
    pub fn passes(&self) -> bool {
        [
            self.q_breve_residual,
            self.q_hat_residual,
            self.unitarity_defect,
            self.representation_defect,
        ]
        .iter()
        .all(|&r| r <= self.bound)
            && self.q_breve_min_eigenvalue > 0.0
            && self.q_hat_min_eigenvalue > 0.0
    }
}

/// Solve `q·B = A` in the least-squares sense: `q = A·B*·(B·B*)⁻¹`.
fn least_squares_q(a: &ComplexMatrix, b: &ComplexMatrix, seq: &GbdtSequence, k: usize, name: &str)
    -> Result<(ComplexMatrix, f64), GbdtError> {
    let gram = b * &b.adjoint();
    let g = cholesky(&gram, seq.tolerance()).map_err(|e| GbdtError::FactorizationFailure {
        k,
        detail: format!("B for {name} is rank deficient: {e}"),
    })?;
    // q = (G⁻¹·B·A*)* since G is Hermitian.
    let q = g.solve(&(b * &a.adjoint()))?.adjoint();
    let residual = (a - &(&q * b)).frobenius_norm() / a.frobenius_norm().max(1.0);
    Ok((q.hermitian_part(), residual))
}

fn positive_root(q: &ComplexMatrix, seq: &GbdtSequence, k: usize, name: &str) -> Result<(ComplexMatrix, f64), GbdtError> {
    let min_eig = hermitian_eigenvalues(q)?.first().copied().unwrap_or(0.0);
    if cholesky(q, seq.tolerance()).is_err() || min_eig <= 0.0 {
        return Err(GbdtError::FactorizationFailure {
            k,
            detail: format!("{name} is not positive definite (smallest eigenvalue {min_eig:e})"),
        });
    }
    Ok((hermitian_sqrt(q)?, min_eig))
}

/// Recover the unitary `W_k` with `C̃_k = W_k*·j·W_k` from the generating
/// unitary `U_k` of the initial potential.
///
/// With `P₁, P₂` the first `m₁` and last `m₂` rows of `U_k`:
/// `A₁ = P₁·w_α(k+1, −i)*`, `B₁ = P₁·w_α(k, i)*`,
/// `A₂ = P₂·w_α(k+1, i)*`, `B₂ = P₂·w_α(k, −i)*`; the positive matrices
/// `q̆_k, q̂_k` solve `A₁ = q̆_kB₁`, `A₂ = q̂_kB₂`.
pub fn unitary_factor(seq: &GbdtSequence, k: usize) -> Result<UnitaryFactor, GbdtError> {
    if seq.mode() != Mode::Strict {
        return Err(GbdtError::RequiresStrictMode);
    }
    if k >= seq.steps() {
        return Err(GbdtError::StepOutOfRange {
            k,
            available: seq.steps(),
        });
    }
    let us = seq.potential().u_matrices().ok_or(GbdtError::MissingUnitaries)?;
    let plus = darboux_trajectory(seq, I, k + 1)?;
    let minus = darboux_trajectory(seq, -I, k + 1)?;
    unitary_factor_from(seq, k, &us[k], &plus, &minus)
}

fn unitary_factor_from(
    seq: &GbdtSequence,
    k: usize,
    u: &ComplexMatrix,
    plus: &[ComplexMatrix],
    minus: &[ComplexMatrix],
) -> Result<UnitaryFactor, GbdtError> {
    let sig = seq.potential().signature();
    let (m1, m) = (sig.m1(), sig.m());
    let p1 = u.row_block(0, m1);
    let p2 = u.row_block(m1, m);
    let a1 = &p1 * &minus[k + 1].adjoint();
    let b1 = &p1 * &plus[k].adjoint();
    let a2 = &p2 * &plus[k + 1].adjoint();
    let b2 = &p2 * &minus[k].adjoint();

    let (q_breve, q_breve_residual) = least_squares_q(&a1, &b1, seq, k, "q̆")?;
    let (q_hat, q_hat_residual) = least_squares_q(&a2, &b2, seq, k, "q̂")?;
    let bound = seq.tolerance().step_bound(k);
    for (name, r) in [("q̆", q_breve_residual), ("q̂", q_hat_residual)] {
        if r > bound {
            return Err(GbdtError::FactorizationFailure {
                k,
                detail: format!("{name} does not reproduce A from B (relative residual {r:e})"),
            });
        }
    }
    let (root_breve, q_breve_min_eigenvalue) = positive_root(&q_breve, seq, k, "q̆")?;
    let (root_hat, q_hat_min_eigenvalue) = positive_root(&q_hat, seq, k, "q̂")?;

    let w = &ComplexMatrix::block_diagonal(&root_breve, &root_hat) * &ComplexMatrix::vstack(&b1, &b2)?;
    let id = ComplexMatrix::identity(m);
    let unitarity_defect = (&(&w * &w.adjoint()) - &id).frobenius_norm();
    let representation_defect = (&(&(&w.adjoint() * &sig.j()) * &w) - seq.c_tilde(k)).frobenius_norm();

    Ok(UnitaryFactor {
        k,
        w_matrix: w,
        q_breve,
        q_hat,
        q_breve_residual,
        q_hat_residual,
        q_breve_min_eigenvalue,
        q_hat_min_eigenvalue,
        unitarity_defect,
        representation_defect,
        bound,
    })
}

/// Factor every step; the Darboux matrices at `±i` are evaluated once.
pub fn unitary_factors(seq: &GbdtSequence) -> Result<Vec<UnitaryFactor>, GbdtError> {
    if seq.mode() != Mode::Strict {
        return Err(GbdtError::RequiresStrictMode);
    }
    let us = seq.potential().u_matrices().ok_or(GbdtError::MissingUnitaries)?;
    let steps = seq.steps();
    let plus = darboux_trajectory(seq, I, steps)?;
    let minus = darboux_trajectory(seq, -I, steps)?;
    (0..steps).map(|k| unitary_factor_from(seq, k, &us[k], &plus, &minus)).collect()
}

/// `{C̃_k}` with the recovered unitaries `W_k` attached.
pub fn transformed_unitary_potential(seq: &GbdtSequence) -> Result<DiracPotential, GbdtError> {
    let ws = unitary_factors(seq)?.into_iter().map(|f| f.w_matrix).collect();
    Ok(transformed_potential(seq)?.with_unitaries(ws, seq.tolerance())?)
}
