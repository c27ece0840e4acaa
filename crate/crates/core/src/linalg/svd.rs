//! One-sided (Hestenes) Jacobi SVD for small square matrices.

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError, Result};

const MAX_SWEEPS: usize = 60;

/// Returns `(σ, V)` with `A·V = U·diag(σ)`, `V` unitary and `σ` unsorted.
fn jacobi(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    a.require_square("jacobi svd")?;
    let n = a.cols();
    // Work column-major: entry (i, j) of the iterate lives at g[j][i].
    let mut g: Vec<Vec<Complex64>> = (0..n).map(|j| (0..a.rows()).map(|i| a[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = g[p].iter().map(Complex64::norm_sqr).sum();
                let beta: f64 = g[q].iter().map(Complex64::norm_sqr).sum();
                let gamma: Complex64 = g[p].iter().zip(&g[q]).map(|(x, y)| x.conj() * y).sum();
                let gnorm = gamma.norm();
                if gnorm == 0.0 || gnorm <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / gnorm;
                let zeta = (beta - alpha) / (2.0 * gnorm);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Rotate (x_p, e^{-iφ}·x_q) by a real Givens rotation.
                for cols in [&mut g, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let yq = *xq * phase.conj();
                        let new_p = *xp * c - yq * s;
                        let new_q = *xp * s + yq * c;
                        *xp = new_p;
                        *xq = new_q;
                    }
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(LinalgError::NoConvergence {
            op: "jacobi svd",
            iterations: MAX_SWEEPS,
        });
    }
    let sigma = g.iter().map(|col| col.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()).collect();
    let vmat = ComplexMatrix::from_fn(n, n, |i, j| v[j][i]);
    Ok((sigma, vmat))
}

/// Singular values in decreasing order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let (mut sigma, _) = jacobi(a)?;
    sigma.sort_by(|x, y| y.total_cmp(x));
    Ok(sigma)
}

/// `σ_min(A)`. Exactly singular input with an exactly zero column, or one
/// reduced to it by rotation, gives zero.
pub fn smallest_singular_value(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.last().copied().unwrap_or(0.0))
}

/// Eigenvalues of a Hermitian matrix in increasing order, obtained from the
/// singular values of the positive definite shift `H + ‖H‖_F·I`.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    h.require_square("hermitian_eigenvalues")?;
    let hp = h.hermitian_part();
    let shift = hp.frobenius_norm().max(f64::MIN_POSITIVE);
    let (sigma, _) = jacobi(&hp.shift_diagonal(Complex64::new(shift, 0.0)))?;
    let mut eig: Vec<f64> = sigma.into_iter().map(|s| s - shift).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Principal square root of a Hermitian positive semidefinite matrix.
///
/// For such a matrix `A = V·Σ·V*`, so the root is `V·Σ^{1/2}·V*`.
pub fn hermitian_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let h = a.hermitian_part();
    let (sigma, v) = jacobi(&h)?;
    let root: Vec<Complex64> = sigma.iter().map(|s| Complex64::new(s.sqrt(), 0.0)).collect();
    Ok(&(&v * &ComplexMatrix::from_diagonal(&root)) * &v.adjoint())
}
