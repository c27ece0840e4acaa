//! Generalized Bäcklund-Darboux transformation (GBDT) of discrete Dirac
//! systems.
//!
//! A triple `{α, S₀, Λ₀}` with `αS₀ − S₀α* = iΛ₀Λ₀*` drives the recursions
//!
//! ```text
//! Λ_{k+1} = Λ_k + iα⁻¹Λ_kC_k
//! S_{k+1} = S_k + α⁻¹S_k(α*)⁻¹ + α⁻¹Λ_kC_kΛ_k*(α*)⁻¹
//! C̃_k     = C_k + Λ_k*S_k⁻¹Λ_k − Λ_{k+1}*S_{k+1}⁻¹Λ_{k+1}
//! ```
//!
//! and the transformed system is driven by `C̃_k`. The Darboux matrix
//! `w_α(k, z) = I − iΛ_k*S_k⁻¹(α − zI)⁻¹Λ_k` conjugates fundamental solutions:
//! `w̃(k, z) = w_α(k, −z)·w(k, z)·w_α(0, −z)⁻¹`.

mod darboux;
mod factor;
mod generate;
mod sequence;
mod triple;

pub use darboux::{
    darboux_matrix, darboux_trajectory, intertwining_residual, transfer_inverse_residual,
    transformed_fundamental_darboux, transformed_fundamental_direct, DarbouxEvaluation,
};
pub use factor::{transformed_unitary_potential, unitary_factor, unitary_factors, UnitaryFactor};
pub use generate::{random_admissible_triple, triple_from_spectrum, zero_data_triple};
pub use sequence::{
    gbdt_iterate, stationary_identity_residual, transformed_potential, GbdtSequence, StepDiagnostics,
};
pub use triple::{identity_residual, validate_triple, AdmissibilityReport, GbdtTriple, Mode};

use num_complex::Complex64;
use thiserror::Error;

use crate::dirac::DiracError;
use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GbdtError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("inadmissible triple: {}", .0.failures.join("; "))]
    Inadmissible(Box<AdmissibilityReport>),
    #[error("S_{0} is singular")]
    SingularS(usize),
    #[error("numerical breakdown at step {k}: {detail}")]
    NumericalBreakdown { k: usize, detail: String },
    #[error("z = {z} is within {threshold:e} of σ(α) (σ_min(α − zI) = {sigma_min:e})")]
    SpectralCollision {
        z: Complex64,
        sigma_min: f64,
        threshold: f64,
    },
    #[error("spectral parameter z must be nonzero")]
    ZeroSpectralParameter,
    #[error("unitary factorization failed at step {k}: {detail}")]
    FactorizationFailure { k: usize, detail: String },
    #[error("the initial potential carries no generating unitaries")]
    MissingUnitaries,
    #[error("operation requires a strict-mode sequence")]
    RequiresStrictMode,
    #[error("step {k} is out of range (sequence computed through {available})")]
    StepOutOfRange { k: usize, available: usize },
    #[error(transparent)]
    Dirac(#[from] DiracError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
