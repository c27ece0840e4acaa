use num_complex::Complex64;
use proptest::prelude::*;

use dirac_gbdt::dirac::{random_unitary_potential, SignatureSpec};
use dirac_gbdt::gbdt::{
    darboux_matrix, gbdt_iterate, intertwining_residual, random_admissible_triple, transfer_inverse_residual,
    transformed_fundamental_darboux, transformed_fundamental_direct, triple_from_spectrum, unitary_factors, GbdtError,
    Mode,
};
use dirac_gbdt::io::{parse_problem_str, render_json, run_pipeline, Stage};
use dirac_gbdt::linalg::{cholesky, complex_gaussian, random_unitary, ComplexMatrix, Tolerance};

fn signature(m: usize, split: usize) -> SignatureSpec {
    let m1 = 1 + split % (m - 1);
    SignatureSpec::new(m1, m - m1).unwrap()
}

/// |z| in [0.5, 3] stays clear of ±σ(α) and its conjugates for the
/// generated triples, whose eigenvalues have modulus at least 4.
fn small_z() -> impl Strategy<Value = Complex64> {
    (0.5f64..3.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn strict_sequence_invariants(seed in 0u64..10_000, n in 1usize..=3, m in 2usize..=4, split in 0usize..4, steps in 1usize..=12) {
        let tol = Tolerance::default();
        let sig = signature(m, split);
        let triple = random_admissible_triple(n, m, seed).unwrap();
        let potential = random_unitary_potential(sig, steps, seed ^ 0x5eed, &tol).unwrap();
        let seq = gbdt_iterate(&triple, &potential, steps, &tol).unwrap();
        for d in seq.diagnostics() {
            prop_assert!(d.passes(), "{d:?}");
            prop_assert!(cholesky(seq.s(d.k), &tol).is_ok());
            if d.k < steps {
                prop_assert!(d.inertia_defect.is_some());
            }
        }
        for f in unitary_factors(&seq).unwrap() {
            prop_assert!(f.passes(), "k {}: {} {}", f.k, f.unitarity_defect, f.representation_defect);
        }
    }

    #[test]
    fn darboux_identities_off_grid(seed in 0u64..10_000, n in 1usize..=3, m in 2usize..=4, z in small_z()) {
        let tol = Tolerance::default();
        let triple = random_admissible_triple(n, m, seed).unwrap();
        let potential = random_unitary_potential(signature(m, seed as usize), 8, seed + 1, &tol).unwrap();
        let seq = gbdt_iterate(&triple, &potential, 8, &tol).unwrap();
        for k in 0..=8 {
            prop_assert!(transfer_inverse_residual(&seq, k, z).unwrap() <= tol.rel);
            if k < 8 {
                prop_assert!(intertwining_residual(&seq, k, z).unwrap() <= 1e-9);
            }
        }
        let direct = transformed_fundamental_direct(&seq, z, 8).unwrap();
        let darboux = transformed_fundamental_darboux(&seq, z, 8).unwrap();
        for k in 0..=8 {
            prop_assert!(direct.values[k].max_abs_diff(&darboux.values[k]) <= 1e-8 * (1 + k) as f64);
        }
    }

    /// Weak mode: eigenvalues in both half-planes make `S₀` indefinite. The
    /// involution and the conjugation formula still hold while `S_k` stays
    /// invertible.
    #[test]
    fn weak_mode_involution(seed in 0u64..10_000, m in 2usize..=4, flips in proptest::collection::vec(any::<bool>(), 2)) {
        let tol = Tolerance::default();
        let eig: Vec<Complex64> = [Complex64::new(1.0, 5.0), Complex64::new(-2.0, 6.5)]
            .iter()
            .zip(&flips)
            .map(|(d, &f)| if f { d.conj() } else { *d })
            .collect();
        let v = random_unitary(2, seed).unwrap();
        let triple = triple_from_spectrum(&eig, &v, complex_gaussian(2, m, seed + 1), Mode::Weak).unwrap();
        let potential = random_unitary_potential(signature(m, seed as usize), 6, seed + 2, &tol).unwrap();
        let seq = match gbdt_iterate(&triple, &potential, 6, &tol) {
            Err(GbdtError::SingularS(_)) => return Err(TestCaseError::reject("singular S_k")),
            other => other.unwrap(),
        };
        for k in 0..6 {
            let ct = seq.c_tilde(k);
            let inv = (&(ct * ct) - &ComplexMatrix::identity(m)).frobenius_norm();
            prop_assert!(inv <= 1e-9 * (1 + k) as f64, "k {k}: {inv}");
        }
        let z = Complex64::new(0.7, -1.3);
        prop_assert!(darboux_matrix(&seq, 0, z).is_ok());
        let direct = transformed_fundamental_direct(&seq, z, 6).unwrap();
        let darboux = transformed_fundamental_darboux(&seq, z, 6).unwrap();
        for k in 0..=6 {
            prop_assert!(direct.values[k].max_abs_diff(&darboux.values[k]) <= 1e-8 * (1 + k) as f64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn pipeline_is_deterministic(seed in 0u64..1000, n in 1usize..=2, m in 2usize..=3) {
        let triple = random_admissible_triple(n, m, seed).unwrap();
        let text = serde_json::json!({
            "signature": {"m1": 1, "m2": m - 1},
            "potential": {"type": "random-unitary", "seed": seed},
            "triple": {"alpha": triple.alpha, "s0": triple.s0, "lambda0": triple.lambda0, "mode": "strict"},
            "run": {"steps": 5}
        })
        .to_string();
        let spec = parse_problem_str(&text).unwrap();
        let a = run_pipeline(&spec, &Stage::ALL, false);
        let b = run_pipeline(&spec, &Stage::ALL, false);
        prop_assert_eq!(a.exit_status().code(), 0, "{:?}", a.failed_checks);
        prop_assert_eq!(render_json(&a), render_json(&b));
    }
}
