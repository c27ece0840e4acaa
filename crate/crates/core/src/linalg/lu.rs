use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError, Result, Tolerance};

/// Row-pivoted LU factorization `P·A = L·U` with unit lower `L`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    swaps: usize,
    norm_one: f64,
}

/// Result of [`solve`]: the solution together with the 1-norm condition
/// estimate of the coefficient matrix.
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: ComplexMatrix,
    pub condition_estimate: f64,
}

impl LuFactor {
    /// Factor `a`. A pivot whose modulus is at most `tol.abs` times the
    /// largest modulus in its original row is reported as singular.
    pub fn new(a: &ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        a.require_square("lu")?;
        let n = a.rows();
        let row_scale: Vec<f64> = (0..n)
            .map(|i| a.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .collect();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;

        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            let scale = row_scale[perm[p]];
            if best == 0.0 || best <= tol.abs * scale || scale == 0.0 {
                return Err(LinalgError::SingularMatrix {
                    pivot: k,
                    modulus: best,
                });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            swaps,
            norm_one: a.norm_one(),
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solve `A·X = B`.
    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dim();
        if b.rows() != n {
            return Err(LinalgError::DimensionMismatch {
                op: "solve",
                detail: format!("A is {n}x{n}, B has {} rows", b.rows()),
            });
        }
        let mut x = ComplexMatrix::from_fn(n, b.cols(), |i, j| b[(self.perm[i], j)]);
        for col in 0..b.cols() {
            for i in 0..n {
                let mut acc = x[(i, col)];
                for k in 0..i {
                    acc -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = x[(i, col)];
                for k in i + 1..n {
                    acc -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = acc / self.lu[(i, i)];
            }
        }
        Ok(x)
    }

    /// Solve `A*·X = B`.
    pub fn solve_adjoint(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dim();
        if b.rows() != n {
            return Err(LinalgError::DimensionMismatch {
                op: "solve_adjoint",
                detail: format!("A is {n}x{n}, B has {} rows", b.rows()),
            });
        }
        // A* = U*·L*·P, so solve U*·w = b, L*·v = w, then x = Pᵀ·v.
        let mut w = b.clone();
        for col in 0..b.cols() {
            for i in 0..n {
                let mut acc = w[(i, col)];
                for k in 0..i {
                    acc -= self.lu[(k, i)].conj() * w[(k, col)];
                }
                w[(i, col)] = acc / self.lu[(i, i)].conj();
            }
            for i in (0..n).rev() {
                let mut acc = w[(i, col)];
                for k in i + 1..n {
                    acc -= self.lu[(k, i)].conj() * w[(k, col)];
                }
                w[(i, col)] = acc;
            }
        }
        let mut x = ComplexMatrix::zeros(n, b.cols());
        for i in 0..n {
            for col in 0..b.cols() {
                x[(self.perm[i], col)] = w[(i, col)];
            }
        }
        Ok(x)
    }

    pub fn determinant(&self) -> Complex64 {
        let d = (0..self.dim()).fold(Complex64::new(1.0, 0.0), |acc, i| acc * self.lu[(i, i)]);
        if self.swaps % 2 == 1 {
            -d
        } else {
            d
        }
    }

    /// Hager's estimate of `‖A‖₁·‖A⁻¹‖₁`.
    pub fn condition_estimate(&self) -> f64 {
        let inv = inverse_norm_one_estimate(
            self.dim(),
            |b| self.solve(b).expect("dimension checked"),
            |b| self.solve_adjoint(b).expect("dimension checked"),
        );
        inv * self.norm_one
    }
}

/// Hager's lower estimate of `‖A⁻¹‖₁` given solvers for `A` and `A*`.
pub(crate) fn inverse_norm_one_estimate(
    n: usize,
    solve: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    solve_adjoint: impl Fn(&ComplexMatrix) -> ComplexMatrix,
) -> f64 {
    let mut x = ComplexMatrix::from_fn(n, 1, |_, _| Complex64::new(1.0 / n as f64, 0.0));
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = solve(&x);
        estimate = (0..n).map(|i| y[(i, 0)].norm()).sum::<f64>();
        let sign = y.map(|v| if v.norm() > 0.0 { v / v.norm() } else { Complex64::new(1.0, 0.0) });
        let z = solve_adjoint(&sign);
        let (jmax, zmax) = (0..n)
            .map(|i| (i, z[(i, 0)].norm()))
            .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        let ztx: f64 = (0..n).map(|i| (z[(i, 0)].conj() * x[(i, 0)]).re).sum();
        if zmax <= ztx {
            break;
        }
        x = ComplexMatrix::zeros(n, 1);
        x[(jmax, 0)] = Complex64::new(1.0, 0.0);
    }
    estimate
}

/// Solve `A·X = B` by row-pivoted LU.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerance) -> Result<Solution> {
    let lu = LuFactor::new(a, tol)?;
    let x = lu.solve(b)?;
    Ok(Solution {
        x,
        condition_estimate: lu.condition_estimate(),
    })
}
