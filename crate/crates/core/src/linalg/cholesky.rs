use num_complex::Complex64;

use super::lu::inverse_norm_one_estimate;
use super::{hermitian_residual, ComplexMatrix, LinalgError, Result, Tolerance};

/// Lower-triangular `L` with positive real diagonal and `L·L* = (A + A*)/2`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    l: ComplexMatrix,
    asymmetry: f64,
    norm_one: f64,
}

impl CholeskyFactor {
    pub fn lower(&self) -> &ComplexMatrix {
        &self.l
    }

    /// Hermitian residual of the matrix before symmetrization.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.l * &self.l.adjoint()
    }

    /// Solve `L·L*·X = B`.
    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dim();
        if b.rows() != n {
            return Err(LinalgError::DimensionMismatch {
                op: "cholesky solve",
                detail: format!("factor is {n}x{n}, B has {} rows", b.rows()),
            });
        }
        let l = &self.l;
        let mut x = b.clone();
        for col in 0..b.cols() {
            for i in 0..n {
                let mut acc = x[(i, col)];
                for k in 0..i {
                    acc -= l[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = acc / l[(i, i)].re;
            }
            for i in (0..n).rev() {
                let mut acc = x[(i, col)];
                for k in i + 1..n {
                    acc -= l[(k, i)].conj() * x[(k, col)];
                }
                x[(i, col)] = acc / l[(i, i)].re;
            }
        }
        Ok(x)
    }

    /// Hager's estimate of the 1-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        let solve = |b: &ComplexMatrix| self.solve(b).expect("dimension checked");
        inverse_norm_one_estimate(self.dim(), solve, solve) * self.norm_one
    }
}

/// Factor the Hermitian part of `a`. Succeeds iff every pivot exceeds
/// `tol.abs·‖A‖_F`, which certifies positive definiteness.
pub fn cholesky(a: &ComplexMatrix, tol: &Tolerance) -> Result<CholeskyFactor> {
    a.require_square("cholesky")?;
    let asymmetry = hermitian_residual(a)?;
    let h = a.hermitian_part();
    let n = h.rows();
    let floor = tol.abs * h.frobenius_norm();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        // NaN pivots fail here too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(d > floor) {
            return Err(LinalgError::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut acc = h[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / djj;
        }
    }
    Ok(CholeskyFactor {
        l,
        asymmetry,
        norm_one: h.norm_one(),
    })
}
