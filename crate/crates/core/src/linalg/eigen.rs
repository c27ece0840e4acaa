//! Small-dimension eigenvalue estimates: Householder reduction to Hessenberg
//! form followed by single-shift complex QR with Wilkinson shifts.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use super::{smallest_singular_value, ComplexMatrix, LinalgError, Result, Tolerance};

/// Largest dimension accepted by [`spectrum_diagnostic`].
pub const SPECTRUM_MAX_DIM: usize = 64;

const ITERATIONS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    pub values: Vec<Complex64>,
    /// `σ_min(A − λI) / max(1, ‖A‖_F)` for each estimate.
    pub residuals: Vec<f64>,
}

impl SpectrumEstimate {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// Distance from `z` to the nearest estimate.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.values.iter().map(|l| (l - z).norm()).fold(f64::INFINITY, f64::min)
    }
}

fn hessenberg(a: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    let n = a.rows();
    let mut h: Vec<Vec<Complex64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).map(|i| h[i][k].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[k + 1][k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[i][k]).collect();
        v[0] += phase * xnorm;
        let vnorm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        for e in v.iter_mut() {
            *e /= vnorm;
        }
        // H ← (I − 2vv*)·H
        for j in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(r, vr)| vr.conj() * h[k + 1 + r][j]).sum();
            for (r, vr) in v.iter().enumerate() {
                h[k + 1 + r][j] -= *vr * dot * 2.0;
            }
        }
        // H ← H·(I − 2vv*)
        for row in h.iter_mut() {
            let dot: Complex64 = v.iter().enumerate().map(|(r, vr)| row[k + 1 + r] * vr).sum();
            for (r, vr) in v.iter().enumerate() {
                row[k + 1 + r] -= dot * vr.conj() * 2.0;
            }
        }
        for row in h.iter_mut().skip(k + 2) {
            row[k] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (l1, l2) = (mid + disc, mid - disc);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalue estimates for a square matrix of dimension at most
/// [`SPECTRUM_MAX_DIM`]. Each estimate is accompanied by its singular-value
/// residual so callers can judge its quality.
pub fn spectrum_diagnostic(a: &ComplexMatrix, _tol: &Tolerance) -> Result<SpectrumEstimate> {
    a.require_square("spectrum_diagnostic")?;
    let n = a.rows();
    if n > SPECTRUM_MAX_DIM {
        return Err(LinalgError::DimensionMismatch {
            op: "spectrum_diagnostic",
            detail: format!("dimension {n} exceeds {SPECTRUM_MAX_DIM}"),
        });
    }
    let mut h = hessenberg(a);
    let anorm = a.frobenius_norm();
    let eps = f64::EPSILON;
    let mut values = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iter = 0;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[l][l - 1].norm();
            let mut local = h[l][l].norm() + h[l - 1][l - 1].norm();
            if local == 0.0 {
                local = anorm;
            }
            if sub <= eps * local {
                h[l][l - 1] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            values.push(h[hi][hi]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > ITERATIONS_PER_EIGENVALUE {
            return Err(LinalgError::NoConvergence {
                op: "spectrum_diagnostic",
                iterations: iter,
            });
        }
        let mu = if iter % 11 == 0 {
            h[hi][hi] + Complex64::new(h[hi][hi - 1].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        };
        for i in l..=hi {
            h[i][i] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for i in l..hi {
            let (c, s) = givens(h[i][i], h[i + 1][i]);
            for j in i..=hi {
                let (x, y) = (h[i][j], h[i + 1][j]);
                h[i][j] = x * c + s * y;
                h[i + 1][j] = -s.conj() * x + y * c;
            }
            rotations.push((c, s));
        }
        for (idx, (c, s)) in rotations.into_iter().enumerate() {
            let i = l + idx;
            for row in h.iter_mut().take((i + 2).min(hi) + 1).skip(l) {
                let (x, y) = (row[i], row[i + 1]);
                row[i] = x * c + y * s.conj();
                row[i + 1] = -x * s + y * c;
            }
        }
        for i in l..=hi {
            h[i][i] += mu;
        }
    }
    values.push(h[0][0]);
    values.reverse();

    let scale = anorm.max(1.0);
    let residuals = values
        .iter()
        .map(|&lambda| smallest_singular_value(&a.shift_diagonal(-lambda)).map(|s| s / scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumEstimate { values, residuals })
}
