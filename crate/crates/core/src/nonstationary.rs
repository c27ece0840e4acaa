//! Explicit solutions `Ψ(t) = Y·e^{itα}` of the block system
//! `(I − 𝒮)Ψ″ + C̃Ψ′ + 𝒮Ψ = 0`, where `𝒮` shifts blocks (`(𝒮Ψ)_k = Ψ_{k+1}`)
//! and `C̃` acts blockwise. Both operators are applied by index arithmetic.

use serde::Serialize;

use crate::gbdt::{GbdtError, GbdtSequence};
use crate::linalg::{matrix_exponential, ComplexMatrix, I};

/// `Y_k = Λ_k*·S_k⁻¹` for `k = 0..=K`.
#[derive(Debug, Clone)]
pub struct SolutionGenerator<'a> {
    seq: &'a GbdtSequence,
    y_blocks: Vec<ComplexMatrix>,
}

impl<'a> SolutionGenerator<'a> {
    pub fn sequence(&self) -> &'a GbdtSequence {
        self.seq
    }

    /// Number of block equations available; `K + 1` blocks are stored.
    pub fn steps(&self) -> usize {
        self.y_blocks.len() - 1
    }

    pub fn y_blocks(&self) -> &[ComplexMatrix] {
        &self.y_blocks
    }

    /// `‖Y_k·S_k − Λ_k*‖_F`.
    pub fn y_residual(&self, k: usize) -> f64 {
        (&(&self.y_blocks[k] * self.seq.s(k)) - &self.seq.lambda(k).adjoint()).frobenius_norm()
    }
}

pub fn build_generator(seq: &GbdtSequence, steps: usize) -> Result<SolutionGenerator<'_>, GbdtError> {
    if steps > seq.steps() {
        return Err(GbdtError::StepOutOfRange {
            k: steps,
            available: seq.steps(),
        });
    }
    let y_blocks = (0..=steps).map(|k| seq.y(k).clone()).collect();
    Ok(SolutionGenerator { seq, y_blocks })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiSample {
    pub t: f64,
    pub blocks: Vec<ComplexMatrix>,
}

fn propagator(gen: &SolutionGenerator<'_>, t: f64) -> Result<ComplexMatrix, GbdtError> {
    Ok(matrix_exponential(&gen.seq.alpha().scale(I * t))?)
}

/// `Ψ_k(t) = Y_k·e^{itα}`.
pub fn sample_psi(gen: &SolutionGenerator<'_>, t: f64) -> Result<PsiSample, GbdtError> {
    let e = propagator(gen, t)?;
    Ok(PsiSample {
        t,
        blocks: gen.y_blocks.iter().map(|y| y * &e).collect(),
    })
}

/// One row of the residual table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockResidual {
    pub k: usize,
    pub t: f64,
    /// `‖Ψ″_k − Ψ″_{k+1} + C̃_kΨ′_k + Ψ_{k+1}‖_F / scale`.
    pub residual: f64,
    pub scale: f64,
    /// `‖−Y_kα² + Y_{k+1}α² + iC̃_kY_kα + Y_{k+1}‖_F / scale`.
    pub stationary_residual: f64,
}

/// Residuals of the first `K` block equations at time `t`, with
/// `Ψ′_k = Y_k(iα)e^{itα}` and `Ψ″_k = −Y_kα²e^{itα}`.
pub fn nonstationary_residual(gen: &SolutionGenerator<'_>, t: f64) -> Result<Vec<BlockResidual>, GbdtError> {
    let alpha = gen.seq.alpha();
    let alpha2 = alpha * alpha;
    let e = propagator(gen, t)?;
    let ia = alpha.scale(I);
    let psi: Vec<ComplexMatrix> = gen.y_blocks.iter().map(|y| y * &e).collect();
    let d1: Vec<ComplexMatrix> = gen.y_blocks.iter().map(|y| &(y * &ia) * &e).collect();
    let d2: Vec<ComplexMatrix> = gen.y_blocks.iter().map(|y| -&(&(y * &alpha2) * &e)).collect();
    let a2 = alpha.frobenius_norm().powi(2);
    (0..gen.steps())
        .map(|k| {
            let ct = gen.seq.c_tilde(k);
            let (y0, y1) = (&gen.y_blocks[k], &gen.y_blocks[k + 1]);
            let scale = (y0.frobenius_norm() * a2 + y1.frobenius_norm() * (a2 + 1.0)).max(1.0);
            let r = &(&(&d2[k] - &d2[k + 1]) + &(ct * &d1[k])) + &psi[k + 1];
            let m = &(&(&(y1 * &alpha2) - &(y0 * &alpha2)) + &(&(ct * y0) * &ia)) + y1;
            Ok(BlockResidual {
                k,
                t,
                residual: r.frobenius_norm() / scale,
                scale,
                stationary_residual: m.frobenius_norm() / scale,
            })
        })
        .collect()
}

/// Per-block discrepancy between central differences of `Ψ_k` and the
/// analytic derivatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeDiscrepancy {
    pub k: usize,
    pub first: f64,
    pub second: f64,
}

impl DerivativeDiscrepancy {
    pub fn max(&self) -> f64 {
        self.first.max(self.second)
    }
}

/// Compare `(Ψ(t+h) − Ψ(t−h))/2h` and `(Ψ(t+h) − 2Ψ(t) + Ψ(t−h))/h²`
/// against `Ψ′(t)`, `Ψ″(t)` for blocks `0..K`. Both errors are `O(h²)`.
pub fn finite_difference_check(
    gen: &SolutionGenerator<'_>,
    t: f64,
    h: f64,
) -> Result<Vec<DerivativeDiscrepancy>, GbdtError> {
    assert!(h > 0.0, "finite-difference step must be positive");
    let alpha = gen.seq.alpha();
    let e = propagator(gen, t)?;
    let ep = propagator(gen, t + h)?;
    let em = propagator(gen, t - h)?;
    let ia = alpha.scale(I);
    let alpha2 = alpha * alpha;
    let d1_exact = &ia * &e;
    let d2_exact = -&(&alpha2 * &e);
    // Y·(difference of propagators) is exactly the difference of Y·E terms up
    // to rounding, so the propagator stencils are formed once.
    let d1_fd = (&ep - &em).scale((0.5 / h).into());
    let d2_fd = (&(&ep - &e.scale(2.0.into())) + &em).scale((1.0 / (h * h)).into());
    Ok((0..gen.steps())
        .map(|k| {
            let y = &gen.y_blocks[k];
            DerivativeDiscrepancy {
                k,
                first: (&(y * &d1_fd) - &(y * &d1_exact)).frobenius_norm(),
                second: (&(y * &d2_fd) - &(y * &d2_exact)).frobenius_norm(),
            }
        })
        .collect())
}

/// `{−1, −½, 0, ½, 1}·min(1, 1/‖α‖_F)`.
pub fn default_t_grid(alpha: &ComplexMatrix) -> Vec<f64> {
    let norm = alpha.frobenius_norm();
    let s = if norm > 0.0 { (1.0 / norm).min(1.0) } else { 1.0 };
    [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|x| x * s).collect()
}
