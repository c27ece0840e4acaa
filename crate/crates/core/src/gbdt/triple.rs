use serde::{Deserialize, Serialize};

use super::GbdtError;
use crate::linalg::{
    cholesky, hermitian_residual, smallest_singular_value, spectrum_diagnostic, ComplexMatrix, LuFactor,
    Tolerance, I,
};

/// Which hypotheses a triple is validated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `S₀ > 0` and `0, i ∉ σ(α)`: the transformed system is again a
    /// skew-selfadjoint Dirac system.
    Strict,
    /// `S₀ = S₀*`, `det α ≠ 0`, `det S_k ≠ 0`: enough for the conjugation
    /// formula and `C̃_k² = I`.
    Weak,
}

/// The GBDT data `{α, S₀, Λ₀}` with `α, S₀` of size `n×n` and `Λ₀` of size
/// `n×m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtTriple {
    pub alpha: ComplexMatrix,
    pub s0: ComplexMatrix,
    pub lambda0: ComplexMatrix,
    pub mode: Mode,
}

impl GbdtTriple {
    pub fn new(alpha: ComplexMatrix, s0: ComplexMatrix, lambda0: ComplexMatrix, mode: Mode) -> Result<Self, GbdtError> {
        check_dimensions(&alpha, &s0, &lambda0)?;
        Ok(Self {
            alpha,
            s0,
            lambda0,
            mode,
        })
    }

    pub fn n(&self) -> usize {
        self.alpha.rows()
    }

    pub fn m(&self) -> usize {
        self.lambda0.cols()
    }

    pub fn validate(&self, tol: &Tolerance) -> Result<AdmissibilityReport, GbdtError> {
        validate_triple(&self.alpha, &self.s0, &self.lambda0, self.mode, tol)
    }
}

fn check_dimensions(alpha: &ComplexMatrix, s0: &ComplexMatrix, lambda0: &ComplexMatrix) -> Result<(), GbdtError> {
    let n = alpha.rows();
    if !alpha.is_square() {
        return Err(GbdtError::DimensionMismatch(format!(
            "alpha must be square, got {}x{}",
            alpha.rows(),
            alpha.cols()
        )));
    }
    if s0.shape() != (n, n) {
        return Err(GbdtError::DimensionMismatch(format!(
            "s0 must be {n}x{n}, got {}x{}",
            s0.rows(),
            s0.cols()
        )));
    }
    if lambda0.rows() != n {
        return Err(GbdtError::DimensionMismatch(format!(
            "lambda0 must have {n} rows, got {}",
            lambda0.rows()
        )));
    }
    Ok(())
}

/// `‖αS − Sα* − iΛΛ*‖_F / (‖α‖_F‖S‖_F + ‖Λ‖_F²)`.
pub fn identity_residual(alpha: &ComplexMatrix, s: &ComplexMatrix, lambda: &ComplexMatrix) -> f64 {
    let lhs = &(alpha * s) - &(s * &alpha.adjoint());
    let rhs = (lambda * &lambda.adjoint()).scale(I);
    let scale = alpha.frobenius_norm() * s.frobenius_norm() + lambda.frobenius_norm().powi(2);
    let r = (&lhs - &rhs).frobenius_norm();
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub mode: Mode,
    pub n: usize,
    pub m: usize,
    pub identity_residual: f64,
    pub identity_bound: f64,
    pub s0_hermitian_residual: f64,
    /// Cholesky verdict, strict mode only.
    pub s0_positive_definite: Option<bool>,
    /// LU verdict, weak mode only.
    pub s0_invertible: Option<bool>,
    pub sigma_min_alpha: f64,
    pub sigma_min_alpha_minus_i: f64,
    pub spectral_threshold: f64,
    pub eigenvalues: Vec<[f64; 2]>,
    pub eigenvalue_residual: Option<f64>,
    pub eigenvalue_error: Option<String>,
    /// Some eigenvalue estimate of `α` lies materially below the real axis,
    /// which a positive `S₀` satisfying the identity rules out.
    pub lower_half_plane_flag: bool,
    pub failures: Vec<String>,
    pub admissible: bool,
}

/// Check the triple against the hypotheses of `mode`.
pub fn validate_triple(
    alpha: &ComplexMatrix,
    s0: &ComplexMatrix,
    lambda0: &ComplexMatrix,
    mode: Mode,
    tol: &Tolerance,
) -> Result<AdmissibilityReport, GbdtError> {
    check_dimensions(alpha, s0, lambda0)?;
    let n = alpha.rows();
    let alpha_norm = alpha.frobenius_norm();
    let identity = identity_residual(alpha, s0, lambda0);
    let identity_bound = tol.step_bound(0);
    let s0_herm = hermitian_residual(s0)?;
    let sigma_alpha = smallest_singular_value(alpha)?;
    let sigma_alpha_i = smallest_singular_value(&alpha.shift_diagonal(-I))?;
    let threshold = tol.spectral_threshold(alpha_norm);

    let mut failures = Vec::new();
    if identity > identity_bound {
        failures.push(format!(
            "identity αS₀ − S₀α* = iΛ₀Λ₀* violated (relative residual {identity:e})"
        ));
    }
    if s0_herm > tol.step_bound(0) {
        failures.push(format!("S₀ is not Hermitian (residual {s0_herm:e})"));
    }
    if sigma_alpha <= threshold {
        failures.push(format!("0 ∈ σ(α) (σ_min(α) = {sigma_alpha:e})"));
    }

    let (mut s0_pd, mut s0_inv) = (None, None);
    match mode {
        Mode::Strict => {
            let pd = cholesky(s0, tol).is_ok();
            if !pd {
                failures.push("S₀ is not positive definite".into());
            }
            s0_pd = Some(pd);
            if sigma_alpha_i <= threshold {
                failures.push(format!("i ∈ σ(α) (σ_min(α − iI) = {sigma_alpha_i:e})"));
            }
        }
        Mode::Weak => {
            let inv = LuFactor::new(&s0.hermitian_part(), tol).is_ok();
            if !inv {
                failures.push("S₀ is singular".into());
            }
            s0_inv = Some(inv);
        }
    }

    let (eigenvalues, eigenvalue_residual, eigenvalue_error, flag) = match spectrum_diagnostic(alpha, tol) {
        Ok(est) => {
            let below = 1e-8 * alpha_norm.max(1.0);
            let flag = mode == Mode::Strict && est.values.iter().any(|z| z.im < -below);
            let vals = est.values.iter().map(|z| [z.re, z.im]).collect();
            (vals, Some(est.max_residual()), None, flag)
        }
        Err(e) => (Vec::new(), None, Some(e.to_string()), false),
    };

    let admissible = failures.is_empty();
    Ok(AdmissibilityReport {
        mode,
        n,
        m: lambda0.cols(),
        identity_residual: identity,
        identity_bound,
        s0_hermitian_residual: s0_herm,
        s0_positive_definite: s0_pd,
        s0_invertible: s0_inv,
        sigma_min_alpha: sigma_alpha,
        sigma_min_alpha_minus_i: sigma_alpha_i,
        spectral_threshold: threshold,
        eigenvalues,
        eigenvalue_residual,
        eigenvalue_error,
        lower_half_plane_flag: flag,
        failures,
        admissible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(z: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[z])
    }

    #[test]
    fn scalar_fixture_is_admissible() {
        let lambda0 = ComplexMatrix::from_real(1, 2, &[2.0, 0.0]).unwrap();
        let rep = validate_triple(&scalar(c(0., 2.)), &scalar(c(1., 0.)), &lambda0, Mode::Strict, &Tolerance::default())
            .unwrap();
        // 2i·1 − 1·(−2i) = 4i = i·|2|²
        assert_eq!(rep.identity_residual, 0.0);
        assert!(rep.admissible, "{:?}", rep.failures);
        assert_eq!(rep.s0_positive_definite, Some(true));
        assert!((rep.sigma_min_alpha - 2.0).abs() < 1e-15);
        assert!((rep.sigma_min_alpha_minus_i - 1.0).abs() < 1e-15);
        assert_eq!(rep.eigenvalues, vec![[0.0, 2.0]]);
        assert!(!rep.lower_half_plane_flag);
    }

    #[test]
    fn zero_lambda_identity_alpha() {
        let rep = validate_triple(
            &ComplexMatrix::identity(3),
            &ComplexMatrix::identity(3),
            &ComplexMatrix::zeros(3, 2),
            Mode::Strict,
            &Tolerance::default(),
        )
        .unwrap();
        assert!(rep.admissible);
        assert_eq!(rep.identity_residual, 0.0);
        assert!((rep.sigma_min_alpha_minus_i - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn alpha_equal_to_i_is_excluded() {
        let rep = validate_triple(
            &scalar(c(0., 1.)),
            &scalar(c(1., 0.)),
            &ComplexMatrix::zeros(1, 2),
            Mode::Strict,
            &Tolerance::default(),
        )
        .unwrap();
        assert!(!rep.admissible);
        assert!(rep.failures.iter().any(|f| f.starts_with("i ∈ σ(α)")));
        // The identity itself fails too: 2i·1 ≠ 0.
        assert!(rep.identity_residual > 0.0);
    }

    #[test]
    fn weak_mode_accepts_indefinite_s0() {
        let lambda0 = ComplexMatrix::from_real(1, 2, &[1.0, 0.0]).unwrap();
        let rep = validate_triple(&scalar(c(0., -1.)), &scalar(c(-0.5, 0.)), &lambda0, Mode::Weak, &Tolerance::default())
            .unwrap();
        assert!(rep.admissible, "{:?}", rep.failures);
        let strict =
            validate_triple(&scalar(c(0., -1.)), &scalar(c(-0.5, 0.)), &lambda0, Mode::Strict, &Tolerance::default())
                .unwrap();
        assert!(!strict.admissible);
        assert!(strict.lower_half_plane_flag);
    }

    #[test]
    fn dimension_errors() {
        let err = validate_triple(
            &ComplexMatrix::identity(2),
            &ComplexMatrix::identity(2),
            &ComplexMatrix::zeros(3, 2),
            Mode::Strict,
            &Tolerance::default(),
        )
        .unwrap_err();
        assert!(matches!(err, GbdtError::DimensionMismatch(msg) if msg.contains("lambda0")));
        assert!(GbdtTriple::new(
            ComplexMatrix::zeros(2, 3),
            ComplexMatrix::identity(2),
            ComplexMatrix::zeros(2, 2),
            Mode::Weak
        )
        .is_err());
    }
}
