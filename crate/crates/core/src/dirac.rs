//! Discrete skew-selfadjoint Dirac systems
//! `y_{k+1}(z) = (I + (i/z)·C_k)·y_k(z)` with `C_k = U_k*·j·U_k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{ComplexMatrix, LinalgError, Tolerance, I};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiracError {
    #[error("U_{k} is not unitary: ‖U·U* − I‖_F = {defect:e}")]
    NotUnitary { k: usize, defect: f64 },
    #[error("C_{k} violates C = C*, C² = I (hermitian residual {hermitian:e}, involution residual {involution:e})")]
    InvalidPotential {
        k: usize,
        hermitian: f64,
        involution: f64,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("spectral parameter z must be nonzero")]
    ZeroSpectralParameter,
    #[error("requested {requested} steps but the potential stores {available}")]
    TooFewSteps { requested: usize, available: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The split `m = m1 + m2` fixing `j = diag(I_{m1}, −I_{m2})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawSignature")]
pub struct SignatureSpec {
    m1: usize,
    m2: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignature {
    m1: usize,
    m2: usize,
}

impl TryFrom<RawSignature> for SignatureSpec {
    type Error = DiracError;
    fn try_from(raw: RawSignature) -> Result<Self, DiracError> {
        SignatureSpec::new(raw.m1, raw.m2)
    }
}

impl SignatureSpec {
    pub fn new(m1: usize, m2: usize) -> Result<Self, DiracError> {
        if m1 == 0 || m2 == 0 {
            return Err(DiracError::DimensionMismatch(format!(
                "m1 and m2 must both be at least 1, got m1 = {m1}, m2 = {m2}"
            )));
        }
        Ok(Self { m1, m2 })
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    pub fn m(&self) -> usize {
        self.m1 + self.m2
    }

    pub fn j(&self) -> ComplexMatrix {
        let d: Vec<Complex64> = (0..self.m())
            .map(|i| Complex64::new(if i < self.m1 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        ComplexMatrix::from_diagonal(&d)
    }
}

/// Residuals of the defining identities of one potential coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialStepResidual {
    pub k: usize,
    /// `‖C_k − C_k*‖_F`
    pub hermitian: f64,
    /// `‖C_k² − I‖_F`
    pub involution: f64,
    /// `‖C_k − U_k*·j·U_k‖_F`, when the unitaries are known.
    pub representation: Option<f64>,
    pub bound: f64,
}

impl PotentialStepResidual {
    pub fn passes(&self) -> bool {
        self.hermitian <= self.bound
            && self.involution <= self.bound
            && self.representation.is_none_or(|r| r <= self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialReport {
    pub steps: Vec<PotentialStepResidual>,
    pub pass: bool,
}

impl PotentialReport {
    pub fn first_failure(&self) -> Option<&PotentialStepResidual> {
        self.steps.iter().find(|s| !s.passes())
    }
}

/// A finite stretch `C_0, …, C_{K−1}` of a Dirac potential.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracPotential {
    signature: SignatureSpec,
    c_matrices: Vec<ComplexMatrix>,
    u_matrices: Option<Vec<ComplexMatrix>>,
}

fn check_square(mat: &ComplexMatrix, m: usize, what: &str, k: usize) -> Result<(), DiracError> {
    if mat.shape() != (m, m) {
        return Err(DiracError::DimensionMismatch(format!(
            "{what}_{k} is {}x{}, expected {m}x{m}",
            mat.rows(),
            mat.cols()
        )));
    }
    Ok(())
}

fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (&(u * &u.adjoint()) - &ComplexMatrix::identity(u.rows())).frobenius_norm()
}

impl DiracPotential {
    /// `C_k = U_k*·j·U_k`.
    pub fn from_unitaries(
        unitaries: Vec<ComplexMatrix>,
        signature: SignatureSpec,
        tol: &Tolerance,
    ) -> Result<Self, DiracError> {
        let m = signature.m();
        let j = signature.j();
        let mut c_matrices = Vec::with_capacity(unitaries.len());
        for (k, u) in unitaries.iter().enumerate() {
            check_square(u, m, "U", k)?;
            let defect = unitarity_defect(u);
            if defect > tol.step_bound(0) {
                return Err(DiracError::NotUnitary { k, defect });
            }
            c_matrices.push(&(&u.adjoint() * &j) * u);
        }
        let potential = Self {
            signature,
            c_matrices,
            u_matrices: Some(unitaries),
        };
        potential.ensure_valid(tol)?;
        Ok(potential)
    }

    /// A potential given by its coefficients alone; each `C_k` must be a
    /// Hermitian involution.
    pub fn from_c_matrices(
        c_matrices: Vec<ComplexMatrix>,
        signature: SignatureSpec,
        tol: &Tolerance,
    ) -> Result<Self, DiracError> {
        for (k, c) in c_matrices.iter().enumerate() {
            check_square(c, signature.m(), "C", k)?;
        }
        let potential = Self {
            signature,
            c_matrices,
            u_matrices: None,
        };
        potential.ensure_valid(tol)?;
        Ok(potential)
    }

    /// Wraps coefficients without validation. Used by
    /// [`validate_potential`] tests and for transformed potentials whose
    /// checks are recorded elsewhere.
    pub fn from_c_matrices_unchecked(c_matrices: Vec<ComplexMatrix>, signature: SignatureSpec) -> Self {
        Self {
            signature,
            c_matrices,
            u_matrices: None,
        }
    }

    /// `C_k ≡ j` for `k < steps`, generated by `U_k = I`.
    pub fn constant_j(signature: SignatureSpec, steps: usize) -> Self {
        let m = signature.m();
        Self {
            signature,
            c_matrices: vec![signature.j(); steps],
            u_matrices: Some(vec![ComplexMatrix::identity(m); steps]),
        }
    }

    /// Attach generating unitaries after the fact, checking
    /// `C_k = U_k*·j·U_k`.
    pub fn with_unitaries(mut self, unitaries: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self, DiracError> {
        if unitaries.len() != self.c_matrices.len() {
            return Err(DiracError::DimensionMismatch(format!(
                "{} unitaries for {} coefficients",
                unitaries.len(),
                self.c_matrices.len()
            )));
        }
        for (k, u) in unitaries.iter().enumerate() {
            check_square(u, self.signature.m(), "U", k)?;
            let defect = unitarity_defect(u);
            if defect > tol.step_bound(k) {
                return Err(DiracError::NotUnitary { k, defect });
            }
        }
        self.u_matrices = Some(unitaries);
        self.ensure_valid(tol)?;
        Ok(self)
    }

    fn ensure_valid(&self, tol: &Tolerance) -> Result<(), DiracError> {
        match validate_potential(self, tol).first_failure() {
            None => Ok(()),
            Some(s) => Err(DiracError::InvalidPotential {
                k: s.k,
                hermitian: s.hermitian,
                involution: s.involution,
            }),
        }
    }

    pub fn signature(&self) -> SignatureSpec {
        self.signature
    }

    pub fn steps(&self) -> usize {
        self.c_matrices.len()
    }

    pub fn c(&self, k: usize) -> &ComplexMatrix {
        &self.c_matrices[k]
    }

    pub fn c_matrices(&self) -> &[ComplexMatrix] {
        &self.c_matrices
    }

    pub fn u_matrices(&self) -> Option<&[ComplexMatrix]> {
        self.u_matrices.as_deref()
    }

    /// Copy restricted to the first `steps` coefficients.
    pub fn truncated(&self, steps: usize) -> Result<Self, DiracError> {
        if steps > self.steps() {
            return Err(DiracError::TooFewSteps {
                requested: steps,
                available: self.steps(),
            });
        }
        Ok(Self {
            signature: self.signature,
            c_matrices: self.c_matrices[..steps].to_vec(),
            u_matrices: self.u_matrices.as_ref().map(|u| u[..steps].to_vec()),
        })
    }
}

/// Per-step residuals of `C_k = C_k*`, `C_k² = I` and, when known,
/// `C_k = U_k*·j·U_k`.
pub fn validate_potential(potential: &DiracPotential, tol: &Tolerance) -> PotentialReport {
    let m = potential.signature.m();
    let id = ComplexMatrix::identity(m);
    let j = potential.signature.j();
    let steps: Vec<PotentialStepResidual> = potential
        .c_matrices
        .iter()
        .enumerate()
        .map(|(k, c)| PotentialStepResidual {
            k,
            hermitian: (c - &c.adjoint()).frobenius_norm(),
            involution: (&(c * c) - &id).frobenius_norm(),
            representation: potential
                .u_matrices
                .as_ref()
                .map(|us| (c - &(&(&us[k].adjoint() * &j) * &us[k])).frobenius_norm()),
            bound: tol.step_bound(k),
        })
        .collect();
    let pass = steps.iter().all(PotentialStepResidual::passes);
    PotentialReport { steps, pass }
}

/// `I + sign·(i/z)·C`.
pub(crate) fn step_matrix(c: &ComplexMatrix, z: Complex64, sign: f64) -> ComplexMatrix {
    c.scale(I / z * sign).shift_diagonal(Complex64::new(1.0, 0.0))
}

/// The matrix solution `w(k, z)` normalized by `w(0, z) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalTrajectory {
    pub z: Complex64,
    pub values: Vec<ComplexMatrix>,
}

impl FundamentalTrajectory {
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Run the step recursion driven by `coefficients`.
    pub(crate) fn from_coefficients(
        coefficients: &[ComplexMatrix],
        m: usize,
        z: Complex64,
    ) -> Result<Self, DiracError> {
        if z == Complex64::new(0.0, 0.0) {
            return Err(DiracError::ZeroSpectralParameter);
        }
        let mut values = Vec::with_capacity(coefficients.len() + 1);
        values.push(ComplexMatrix::identity(m));
        for c in coefficients {
            let next = &step_matrix(c, z, 1.0) * values.last().expect("nonempty");
            values.push(next);
        }
        Ok(Self { z, values })
    }
}

/// `w(k+1, z) = (I + (i/z)·C_k)·w(k, z)` for `k < steps`.
pub fn fundamental_solution(
    potential: &DiracPotential,
    z: Complex64,
    steps: usize,
) -> Result<FundamentalTrajectory, DiracError> {
    if steps > potential.steps() {
        return Err(DiracError::TooFewSteps {
            requested: steps,
            available: potential.steps(),
        });
    }
    FundamentalTrajectory::from_coefficients(&potential.c_matrices[..steps], potential.signature.m(), z)
}

/// Random-unitary potential: `U_k = random_unitary(m, seed + k)`.
pub fn random_unitary_potential(
    signature: SignatureSpec,
    steps: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<DiracPotential, DiracError> {
    let unitaries = (0..steps)
        .map(|k| crate::linalg::random_unitary(signature.m(), seed.wrapping_add(k as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    DiracPotential::from_unitaries(unitaries, signature, tol)
}
