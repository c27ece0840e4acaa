use serde::Serialize;

use super::triple::identity_residual;
use super::{GbdtError, GbdtTriple, Mode};
use crate::dirac::DiracPotential;
use crate::linalg::{
    cholesky, hermitian_eigenvalues, CholeskyFactor, ComplexMatrix, LinalgError, LuFactor, Tolerance, I,
};

/// Cached factorization of `S_k`.
#[derive(Debug, Clone)]
enum SFactor {
    Cholesky(CholeskyFactor),
    Lu(LuFactor),
}

impl SFactor {
    fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        match self {
            SFactor::Cholesky(f) => f.solve(b),
            SFactor::Lu(f) => f.solve(b),
        }
    }

    fn condition_estimate(&self) -> f64 {
        match self {
            SFactor::Cholesky(f) => f.condition_estimate(),
            SFactor::Lu(f) => f.condition_estimate(),
        }
    }
}

/// Per-step checks recorded while the recursion runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub k: usize,
    /// Relative residual of `αS_k − S_kα* = iΛ_kΛ_k*`.
    pub identity_residual: f64,
    /// Hermitian residual of `S_k` as produced by the recursion, before it is
    /// symmetrized.
    pub s_asymmetry: f64,
    /// Cholesky verdict on `S_k` (strict mode).
    pub s_positive_definite: Option<bool>,
    pub s_condition_estimate: f64,
    pub condition_warning: bool,
    /// `‖C̃_k² − I‖_F`, for `k < K`.
    pub involution_residual: Option<f64>,
    /// `‖C̃_k − C̃_k*‖_F`, for `k < K`.
    pub c_tilde_hermitian_residual: Option<f64>,
    /// Largest distance of the eigenvalues of `C̃_k` from `+1` (`m₁` times)
    /// and `−1` (`m₂` times), for `k < K`.
    pub inertia_defect: Option<f64>,
    pub bound: f64,
}

impl StepDiagnostics {
    pub fn passes(&self) -> bool {
        let within = |v: Option<f64>| v.is_none_or(|r| r <= self.bound);
        self.identity_residual <= self.bound
            && self.s_positive_definite != Some(false)
            && within(self.involution_residual)
            && within(self.c_tilde_hermitian_residual)
            && within(self.inertia_defect)
    }
}

/// The trajectories `Λ_0..Λ_K`, `S_0..S_K`, `C̃_0..C̃_{K−1}`.
#[derive(Debug, Clone)]
pub struct GbdtSequence {
    triple: GbdtTriple,
    potential: DiracPotential,
    tol: Tolerance,
    alpha_lu: LuFactor,
    lambdas: Vec<ComplexMatrix>,
    s_matrices: Vec<ComplexMatrix>,
    s_factors: Vec<SFactor>,
    y_blocks: Vec<ComplexMatrix>,
    c_tilde: Vec<ComplexMatrix>,
    diagnostics: Vec<StepDiagnostics>,
}

impl GbdtSequence {
    pub fn steps(&self) -> usize {
        self.c_tilde.len()
    }

    pub fn triple(&self) -> &GbdtTriple {
        &self.triple
    }

    pub fn alpha(&self) -> &ComplexMatrix {
        &self.triple.alpha
    }

    pub fn mode(&self) -> Mode {
        self.triple.mode
    }

    /// The initial potential, truncated to the computed steps.
    pub fn potential(&self) -> &DiracPotential {
        &self.potential
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    pub fn lambda(&self, k: usize) -> &ComplexMatrix {
        &self.lambdas[k]
    }

    pub fn s(&self, k: usize) -> &ComplexMatrix {
        &self.s_matrices[k]
    }

    /// `Y_k = Λ_k*·S_k⁻¹`, computed from the cached factorization.
    pub fn y(&self, k: usize) -> &ComplexMatrix {
        &self.y_blocks[k]
    }

    pub fn c_tilde(&self, k: usize) -> &ComplexMatrix {
        &self.c_tilde[k]
    }

    pub fn c_tilde_all(&self) -> &[ComplexMatrix] {
        &self.c_tilde
    }

    pub fn diagnostics(&self) -> &[StepDiagnostics] {
        &self.diagnostics
    }

    /// `S_k⁻¹·B`.
    pub fn solve_s(&self, k: usize, b: &ComplexMatrix) -> Result<ComplexMatrix, GbdtError> {
        self.check_index(k)?;
        Ok(self.s_factors[k].solve(b)?)
    }

    /// `α⁻¹·B`.
    pub fn solve_alpha(&self, b: &ComplexMatrix) -> Result<ComplexMatrix, GbdtError> {
        Ok(self.alpha_lu.solve(b)?)
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<(), GbdtError> {
        if k > self.steps() {
            return Err(GbdtError::StepOutOfRange {
                k,
                available: self.steps(),
            });
        }
        Ok(())
    }
}

fn factor_s(s: &ComplexMatrix, k: usize, mode: Mode, tol: &Tolerance) -> Result<SFactor, GbdtError> {
    match mode {
        Mode::Strict => cholesky(s, tol).map(SFactor::Cholesky).map_err(|e| GbdtError::NumericalBreakdown {
            k,
            detail: format!("S_{k} failed the positivity check: {e}"),
        }),
        Mode::Weak => LuFactor::new(s, tol).map(SFactor::Lu).map_err(|_| GbdtError::SingularS(k)),
    }
}

fn y_block(factor: &SFactor, lambda: &ComplexMatrix) -> Result<ComplexMatrix, GbdtError> {
    // Y = Λ*·S⁻¹ = (S⁻¹·Λ)* because S is Hermitian.
    Ok(factor.solve(lambda)?.adjoint())
}

fn inertia_defect(c_tilde: &ComplexMatrix, m1: usize) -> Result<f64, LinalgError> {
    let eig = hermitian_eigenvalues(c_tilde)?;
    let m2 = eig.len() - m1;
    Ok(eig
        .iter()
        .enumerate()
        .map(|(i, &l)| if i < m2 { (l + 1.0).abs() } else { (l - 1.0).abs() })
        .fold(0.0, f64::max))
}

/// Run the GBDT recursions for `steps` steps.
///
/// The triple is validated first. `S_{k+1}` is symmetrized after each step
/// (its pre-symmetrization asymmetry is recorded) and factored afresh:
/// Cholesky in strict mode, pivoted LU in weak mode.
pub fn gbdt_iterate(
    triple: &GbdtTriple,
    potential: &DiracPotential,
    steps: usize,
    tol: &Tolerance,
) -> Result<GbdtSequence, GbdtError> {
    let report = triple.validate(tol)?;
    if !report.admissible {
        return Err(GbdtError::Inadmissible(Box::new(report)));
    }
    let signature = potential.signature();
    if signature.m() != triple.m() {
        return Err(GbdtError::DimensionMismatch(format!(
            "lambda0 has {} columns but the potential has m = {}",
            triple.m(),
            signature.m()
        )));
    }
    let potential = potential.truncated(steps)?;
    let mode = triple.mode;
    let alpha = &triple.alpha;
    let alpha_lu = LuFactor::new(alpha, tol).map_err(|e| GbdtError::NumericalBreakdown {
        k: 0,
        detail: format!("α could not be factored: {e}"),
    })?;
    let id = ComplexMatrix::identity(signature.m());

    let s0 = triple.s0.hermitian_part();
    let f0 = factor_s(&s0, 0, mode, tol)?;
    let mut lambdas = vec![triple.lambda0.clone()];
    let mut y_blocks = vec![y_block(&f0, &triple.lambda0)?];
    let mut diagnostics = vec![StepDiagnostics {
        k: 0,
        identity_residual: identity_residual(alpha, &s0, &triple.lambda0),
        s_asymmetry: crate::linalg::hermitian_residual(&triple.s0)?,
        s_positive_definite: (mode == Mode::Strict).then_some(true),
        s_condition_estimate: f0.condition_estimate(),
        condition_warning: false,
        involution_residual: None,
        c_tilde_hermitian_residual: None,
        inertia_defect: None,
        bound: tol.step_bound(0),
    }];
    diagnostics[0].condition_warning = diagnostics[0].s_condition_estimate > tol.cond_warn;
    let mut s_matrices = vec![s0];
    let mut s_factors = vec![f0];
    let mut c_tilde = Vec::with_capacity(steps);

    for k in 0..steps {
        let ck = potential.c(k);
        let lambda_k = &lambdas[k];
        let s_k = &s_matrices[k];
        let lambda_c = lambda_k * ck;
        let lambda_next = lambda_k + &alpha_lu.solve(&lambda_c)?.scale(I);

        // α⁻¹·M·(α*)⁻¹ = (α⁻¹·(α⁻¹·M)*)* for M = S_k + Λ_kC_kΛ_k*.
        let inner = s_k + &(&lambda_c * &lambda_k.adjoint());
        let half = alpha_lu.solve(&inner)?;
        let correction = alpha_lu.solve(&half.adjoint())?.adjoint();
        let s_raw = s_k + &correction;
        let s_asymmetry = crate::linalg::hermitian_residual(&s_raw)?;
        let s_next = s_raw.hermitian_part();

        let f_next = factor_s(&s_next, k + 1, mode, tol)?;
        let y_next = y_block(&f_next, &lambda_next)?;
        let ct = &(ck + &(&y_blocks[k] * lambda_k)) - &(&y_next * &lambda_next);

        let diag_k = &mut diagnostics[k];
        diag_k.involution_residual = Some((&(&ct * &ct) - &id).frobenius_norm());
        diag_k.c_tilde_hermitian_residual = Some((&ct - &ct.adjoint()).frobenius_norm());
        diag_k.inertia_defect = Some(inertia_defect(&ct, signature.m1())?);

        let cond = f_next.condition_estimate();
        diagnostics.push(StepDiagnostics {
            k: k + 1,
            identity_residual: identity_residual(alpha, &s_next, &lambda_next),
            s_asymmetry,
            s_positive_definite: (mode == Mode::Strict).then_some(true),
            s_condition_estimate: cond,
            condition_warning: cond > tol.cond_warn,
            involution_residual: None,
            c_tilde_hermitian_residual: None,
            inertia_defect: None,
            bound: tol.step_bound(k + 1),
        });
        lambdas.push(lambda_next);
        s_matrices.push(s_next);
        s_factors.push(f_next);
        y_blocks.push(y_next);
        c_tilde.push(ct);
    }

    Ok(GbdtSequence {
        triple: triple.clone(),
        potential,
        tol: *tol,
        alpha_lu,
        lambdas,
        s_matrices,
        s_factors,
        y_blocks,
        c_tilde,
        diagnostics,
    })
}

/// `{C̃_k}` packaged as a validated Dirac potential.
pub fn transformed_potential(seq: &GbdtSequence) -> Result<DiracPotential, GbdtError> {
    if seq.mode() != Mode::Strict {
        return Err(GbdtError::RequiresStrictMode);
    }
    Ok(DiracPotential::from_c_matrices(
        seq.c_tilde.clone(),
        seq.potential.signature(),
        &seq.tol,
    )?)
}

/// Relative residual of `Y_{k+1}(α² + I) = Y_kα² − iC̃_kY_kα`, normalized
/// by `max(1, ‖Y_k‖‖α‖² + ‖Y_{k+1}‖(‖α‖² + 1))`.
pub fn stationary_identity_residual(seq: &GbdtSequence, k: usize) -> Result<f64, GbdtError> {
    if k >= seq.steps() {
        return Err(GbdtError::StepOutOfRange {
            k,
            available: seq.steps(),
        });
    }
    let alpha = seq.alpha();
    let alpha2 = alpha * alpha;
    let (y0, y1) = (seq.y(k), seq.y(k + 1));
    let lhs = y1 * &alpha2.shift_diagonal(num_complex::Complex64::new(1.0, 0.0));
    let rhs = &(y0 * &alpha2) - &(&(seq.c_tilde(k) * y0) * alpha).scale(I);
    Ok((&lhs - &rhs).frobenius_norm() / stationary_scale(y0, y1, alpha))
}

pub(crate) fn stationary_scale(y0: &ComplexMatrix, y1: &ComplexMatrix, alpha: &ComplexMatrix) -> f64 {
    let a2 = alpha.frobenius_norm().powi(2);
    (y0.frobenius_norm() * a2 + y1.frobenius_norm() * (a2 + 1.0)).max(1.0)
}
