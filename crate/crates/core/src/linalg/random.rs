use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ComplexMatrix, LinalgError, Result};

/// Matrix of independent standard complex Gaussians (unit variance per
/// entry), deterministic in `seed`.
pub fn complex_gaussian(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * scale, im * scale)
    })
}

/// Haar-distributed `m×m` unitary, deterministic in `(m, seed)`.
///
/// Columns of a complex Gaussian matrix are orthonormalized by modified
/// Gram-Schmidt with one reorthogonalization pass. The implied `R` factor has
/// a positive diagonal, which is what makes the distribution Haar.
pub fn random_unitary(m: usize, seed: u64) -> Result<ComplexMatrix> {
    if m == 0 {
        return Err(LinalgError::DimensionMismatch {
            op: "random_unitary",
            detail: "dimension must be positive".into(),
        });
    }
    let g = complex_gaussian(m, m, seed);
    let mut cols: Vec<Vec<Complex64>> = (0..m).map(|j| (0..m).map(|i| g[(i, j)]).collect()).collect();
    for j in 0..m {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: Complex64 = cols[k].iter().zip(&cols[j]).map(|(q, v)| q.conj() * v).sum();
                let (done, rest) = cols.split_at_mut(j);
                for (v, q) in rest[0].iter_mut().zip(&done[k]) {
                    *v -= proj * q;
                }
            }
        }
        let norm = cols[j].iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(LinalgError::SingularMatrix { pivot: j, modulus: 0.0 });
        }
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    Ok(ComplexMatrix::from_fn(m, m, |i, j| cols[j][i]))
}
