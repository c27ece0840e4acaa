//! Matrix exponential by scaling and squaring with the [13/13] Padé
//! approximant (Higham 2005).

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError, LuFactor, Result, Tolerance};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which the [13/13] approximant has backward error below
// the unit roundoff.
const THETA_13: f64 = 5.371920351148152;

// 2^MAX_SQUARINGS overflows long before the loop would terminate.
const MAX_SQUARINGS: i32 = 1000;

fn lin(terms: &[(f64, &ComplexMatrix)]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(terms[0].1.rows(), terms[0].1.cols());
    for (coef, m) in terms {
        out = &out + &m.scale(Complex64::new(*coef, 0.0));
    }
    out
}

/// `e^M` for square `M`.
pub fn matrix_exponential(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.require_square("matrix_exponential")?;
    let n = m.rows();
    let norm = m.norm_one();
    if !norm.is_finite() {
        return Err(LinalgError::Overflow {
            op: "matrix_exponential",
        });
    }
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    if squarings > MAX_SQUARINGS {
        return Err(LinalgError::Overflow {
            op: "matrix_exponential",
        });
    }
    let a = m.scale(Complex64::new(2f64.powi(-squarings), 0.0));
    let b = &PADE13;
    let ident = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &(&a6 * &lin(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)]))
        + &lin(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &ident)]);
    let u = &a * &u_inner;
    let v = &(&a6 * &lin(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)]))
        + &lin(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &ident)]);

    let exact = Tolerance {
        abs: 0.0,
        ..Tolerance::default()
    };
    let denom = LuFactor::new(&(&v - &u), &exact).map_err(|_| LinalgError::Overflow {
        op: "matrix_exponential",
    })?;
    let mut r = denom.solve(&(&v + &u))?;
    for _ in 0..squarings {
        r = &r * &r;
        if !r.is_finite() {
            return Err(LinalgError::Overflow {
                op: "matrix_exponential",
            });
        }
    }
    if !r.is_finite() {
        return Err(LinalgError::Overflow {
            op: "matrix_exponential",
        });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::complex_gaussian;
    use proptest::prelude::*;

    #[test]
    fn zero_gives_identity() {
        let e = matrix_exponential(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e, ComplexMatrix::identity(3));
    }

    #[test]
    fn scalar_decay() {
        // i·t·α with α = 2i, t = 1.
        let m = ComplexMatrix::from_diagonal(&[Complex64::new(0.0, 1.0) * Complex64::new(0.0, 2.0)]);
        let e = matrix_exponential(&m).unwrap();
        assert!((e[(0, 0)] - Complex64::new((-2f64).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rotation_closed_form() {
        for &theta in &[std::f64::consts::FRAC_PI_2, 0.3, 7.5] {
            let m = ComplexMatrix::from_real(2, 2, &[0.0, theta, -theta, 0.0]).unwrap();
            let e = matrix_exponential(&m).unwrap();
            let (s, c) = theta.sin_cos();
            let expected = ComplexMatrix::from_real(2, 2, &[c, s, -s, c]).unwrap();
            assert!(e.max_abs_diff(&expected) < 1e-14, "theta = {theta}");
        }
    }

    #[test]
    fn diagonal_matches_scalar_exponential() {
        let d = [Complex64::new(-3.0, 2.0), Complex64::new(0.5, -9.0), Complex64::new(4.0, 0.0)];
        let e = matrix_exponential(&ComplexMatrix::from_diagonal(&d)).unwrap();
        for (i, z) in d.iter().enumerate() {
            let exact = z.exp();
            assert!((e[(i, i)] - exact).norm() <= 1e-12 * exact.norm());
        }
    }

    #[test]
    fn overflow_is_reported() {
        let m = ComplexMatrix::from_real(1, 1, &[1e6]).unwrap();
        assert!(matches!(matrix_exponential(&m), Err(LinalgError::Overflow { .. })));
    }

    fn scaled_gaussian(n: usize, seed: u64, target: f64) -> ComplexMatrix {
        let g = complex_gaussian(n, n, seed);
        g.scale(Complex64::new(target / g.frobenius_norm(), 0.0))
    }

    proptest! {
        #[test]
        fn inverse_property(n in 1usize..7, seed in any::<u64>(), norm in 0.0f64..10.0) {
            let m = scaled_gaussian(n, seed, norm);
            let p = &matrix_exponential(&m).unwrap() * &matrix_exponential(&-&m).unwrap();
            prop_assert!((&p - &ComplexMatrix::identity(n)).frobenius_norm() <= 1e-10);
        }

        #[test]
        fn semigroup_property(n in 1usize..6, seed in any::<u64>(), s in -1.0f64..1.0, t in -1.0f64..1.0) {
            let m = scaled_gaussian(n, seed, 5.0);
            let lhs = matrix_exponential(&m.scale(Complex64::new(s + t, 0.0))).unwrap();
            let rhs = &matrix_exponential(&m.scale(Complex64::new(s, 0.0))).unwrap()
                * &matrix_exponential(&m.scale(Complex64::new(t, 0.0))).unwrap();
            prop_assert!((&lhs - &rhs).frobenius_norm() <= 1e-10 * lhs.frobenius_norm().max(1.0));
        }
    }
}
