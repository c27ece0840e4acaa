//! Constructors for triples satisfying the GBDT identity.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GbdtError, GbdtTriple, Mode};
use crate::linalg::{complex_gaussian, random_unitary, ComplexMatrix, LuFactor, Tolerance, I};

/// Build `{α, S₀, Λ₀}` with `α = V·diag(d)·V⁻¹` and the unique `S₀` solving
/// `αS₀ − S₀α* = iΛ₀Λ₀*`.
///
/// In the eigenbasis the identity decouples entrywise:
/// `S'_{ij}·(d_i − conj(d_j)) = i·(Λ'Λ'*)_{ij}` with `Λ' = V⁻¹Λ₀` and
/// `S₀ = V·S'·V*`. When every `d_i` lies in the open upper half-plane `S₀`
/// is positive semidefinite (positive definite for generic `Λ₀`).
pub fn triple_from_spectrum(
    eigenvalues: &[Complex64],
    eigenvectors: &ComplexMatrix,
    lambda0: ComplexMatrix,
    mode: Mode,
) -> Result<GbdtTriple, GbdtError> {
    let n = eigenvalues.len();
    if eigenvectors.shape() != (n, n) || lambda0.rows() != n {
        return Err(GbdtError::DimensionMismatch(format!(
            "{n} eigenvalues need {n}x{n} eigenvectors and {n} rows of lambda0"
        )));
    }
    let v_lu = LuFactor::new(eigenvectors, &Tolerance::default())?;
    let v_inv = v_lu.solve(&ComplexMatrix::identity(n))?;
    let alpha = &(eigenvectors * &ComplexMatrix::from_diagonal(eigenvalues)) * &v_inv;
    let lp = v_lu.solve(&lambda0)?;
    let gram = &lp * &lp.adjoint();
    let mut sp = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let denom = eigenvalues[i] - eigenvalues[j].conj();
            if denom.norm() == 0.0 {
                return Err(GbdtError::DimensionMismatch(format!(
                    "eigenvalues d_{i} and conj(d_{j}) coincide; the identity has no unique solution"
                )));
            }
            sp[(i, j)] = I * gram[(i, j)] / denom;
        }
    }
    let s0 = (&(eigenvectors * &sp) * &eigenvectors.adjoint()).hermitian_part();
    GbdtTriple::new(alpha, s0, lambda0, mode)
}

/// Seeded strict-admissible triple of size `n` with `m` columns in `Λ₀`.
///
/// Eigenvalues of `α` are drawn with modulus in `[4, 8]` and argument in
/// `[0.15π, 0.85π]`, pairwise at least `0.5` apart. The eigenvector matrix is
/// a random unitary times a mildly non-normal unit upper triangle, so `α` is
/// not normal in general. Each eigen-row of `Λ_k` is propagated by the
/// transfer matrix at `z = d_i`, so small `|d_i|` separates the growth rates
/// and drives `cond(S_k)` up geometrically. The window keeps `cond(S_k)` near
/// `1e4` or below over 30 steps.
pub fn random_admissible_triple(n: usize, m: usize, seed: u64) -> Result<GbdtTriple, GbdtError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eig: Vec<Complex64> = Vec::with_capacity(n);
    while eig.len() < n {
        let r = rng.random_range(4.0..8.0);
        let theta = std::f64::consts::PI * rng.random_range(0.15..0.85);
        let d = Complex64::from_polar(r, theta);
        if eig.iter().all(|e| (e - d).norm() >= 0.5) {
            eig.push(d);
        }
    }
    let u = random_unitary(n, rng.random())?;
    let g = complex_gaussian(n, n, rng.random());
    let upper = ComplexMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => g[(i, j)] * 0.25,
        std::cmp::Ordering::Equal => Complex64::new(1.0, 0.0),
        std::cmp::Ordering::Greater => Complex64::new(0.0, 0.0),
    });
    let v = &u * &upper;
    let lambda0 = complex_gaussian(n, m, rng.random());
    triple_from_spectrum(&eig, &v, lambda0, Mode::Strict)
}

/// `{α, I, 0}` with Hermitian `α`; the transformation is then the identity
/// on the potential.
pub fn zero_data_triple(alpha: ComplexMatrix, m: usize) -> Result<GbdtTriple, GbdtError> {
    let n = alpha.rows();
    GbdtTriple::new(alpha, ComplexMatrix::identity(n), ComplexMatrix::zeros(n, m), Mode::Strict)
}
