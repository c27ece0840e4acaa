//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64;

use dirac_gbdt::dirac::{fundamental_solution, random_unitary_potential, DiracPotential, SignatureSpec};
use dirac_gbdt::gbdt::{
    darboux_matrix, gbdt_iterate, intertwining_residual, random_admissible_triple, transfer_inverse_residual,
    transformed_fundamental_darboux, transformed_fundamental_direct, unitary_factors, zero_data_triple, GbdtSequence,
    GbdtTriple, Mode,
};
use dirac_gbdt::io::auto_z_grid;
use dirac_gbdt::linalg::{cholesky, random_unitary, ComplexMatrix, Tolerance};
use dirac_gbdt::nonstationary::{build_generator, default_t_grid, finite_difference_check, nonstationary_residual};

const CORPUS: usize = 50;
const CORPUS_STEPS: usize = 30;
const NONSTATIONARY_STEPS: usize = 15;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Worst observed value of `value / bound` and where it happened.
#[derive(Default)]
struct Worst {
    ratio: f64,
    value: f64,
    at: String,
}

impl Worst {
    fn observe(&mut self, value: f64, bound: f64, at: impl FnOnce() -> String) {
        let ratio = value / bound;
        if ratio > self.ratio || ratio.is_nan() {
            self.ratio = ratio;
            self.value = value;
            self.at = at();
        }
    }

    fn ok(&self) -> bool {
        self.ratio <= 1.0
    }

    fn describe(&self) -> String {
        format!("worst {:.3e} ({:.2} of bound) at {}", self.value, self.ratio, self.at)
    }
}

// ---------------------------------------------------------------------------
// Scalar fixture oracle: the recursions written out with 1×2 rows and 2×2
// arrays of scalars, sharing no code with the library.

type Row = [Complex64; 2];
type Mat2 = [[Complex64; 2]; 2];

fn row_times(r: Row, m: Mat2) -> Row {
    [r[0] * m[0][0] + r[1] * m[1][0], r[0] * m[0][1] + r[1] * m[1][1]]
}

fn outer(r: Row) -> Mat2 {
    // r*·r for a row r.
    [[r[0].conj() * r[0], r[0].conj() * r[1]], [r[1].conj() * r[0], r[1].conj() * r[1]]]
}

struct ScalarOracle {
    lambda1: Row,
    s1: Complex64,
    c_tilde0: Mat2,
    w0_at_1: Mat2,
}

fn scalar_oracle() -> ScalarOracle {
    let alpha = c(0., 2.);
    let s0 = c(1., 0.);
    let l0: Row = [c(2., 0.), c(0., 0.)];
    let j: Mat2 = [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]];
    let i = c(0., 1.);
    let lc = row_times(l0, j);
    let lambda1 = [l0[0] + i / alpha * lc[0], l0[1] + i / alpha * lc[1]];
    let lcl = lc[0] * l0[0].conj() + lc[1] * l0[1].conj();
    let s1 = s0 + s0 / (alpha * alpha.conj()) + lcl / (alpha * alpha.conj());
    let (o0, o1) = (outer(l0), outer(lambda1));
    let mut c_tilde0 = j;
    let mut w0_at_1 = [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]];
    for a in 0..2 {
        for b in 0..2 {
            c_tilde0[a][b] += o0[a][b] / s0 - o1[a][b] / s1;
            w0_at_1[a][b] -= i * o0[a][b] / (s0 * (alpha - c(1., 0.)));
        }
    }
    ScalarOracle {
        lambda1,
        s1,
        c_tilde0,
        w0_at_1,
    }
}

fn mat2(m: Mat2) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[m[0].to_vec(), m[1].to_vec()]).unwrap()
}

fn scalar_triple() -> GbdtTriple {
    GbdtTriple::new(
        ComplexMatrix::from_diagonal(&[c(0., 2.)]),
        ComplexMatrix::from_diagonal(&[c(1., 0.)]),
        ComplexMatrix::from_real(1, 2, &[2.0, 0.0]).unwrap(),
        Mode::Strict,
    )
    .unwrap()
}

fn criterion_scalar_fixture() -> Outcome {
    let oracle = scalar_oracle();
    let start = Instant::now();
    let sig = SignatureSpec::new(1, 1).unwrap();
    let seq = gbdt_iterate(&scalar_triple(), &DiracPotential::constant_j(sig, 1), 1, &Tolerance::default()).unwrap();
    let w = darboux_matrix(&seq, 0, c(1., 0.)).unwrap().matrix;
    let elapsed = start.elapsed().as_secs_f64();

    let frozen_lambda1 = ComplexMatrix::from_real(1, 2, &[3.0, 0.0]).unwrap();
    let frozen_s1 = c(2.25, 0.);
    let frozen_w = ComplexMatrix::from_diagonal(&[c(-0.6, 0.8), c(1., 0.)]);
    let oracle_lambda1 = ComplexMatrix::from_rows(&[oracle.lambda1.to_vec()]).unwrap();

    let errs = [
        oracle_lambda1.max_abs_diff(&frozen_lambda1),
        (oracle.s1 - frozen_s1).norm(),
        mat2(oracle.c_tilde0).max_abs_diff(&sig.j()),
        mat2(oracle.w0_at_1).max_abs_diff(&frozen_w),
        seq.lambda(1).max_abs_diff(&frozen_lambda1),
        (seq.s(1)[(0, 0)] - frozen_s1).norm(),
        seq.c_tilde(0).max_abs_diff(&sig.j()),
        w.max_abs_diff(&frozen_w),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Outcome::new(
        worst <= 1e-12 && elapsed < 0.1,
        format!("max abs error {worst:.3e} (oracle and library), runtime {elapsed:.4}s"),
    )
}

// ---------------------------------------------------------------------------
// Corpus of strict-admissible triples with random-unitary potentials.

struct Case {
    seed: u64,
    seq: GbdtSequence,
    grid: Vec<Complex64>,
}

fn corpus_case(seed: u64) -> (GbdtTriple, DiracPotential) {
    let s = seed as usize;
    let n = 1 + s % 4;
    let m = 2 + (s / 4) % 5;
    let m1 = 1 + (s / 20) % (m - 1);
    let sig = SignatureSpec::new(m1, m - m1).unwrap();
    let triple = random_admissible_triple(n, m, 1000 + seed).unwrap();
    let potential = random_unitary_potential(sig, CORPUS_STEPS, 7919 * seed + 1, &Tolerance::default()).unwrap();
    (triple, potential)
}

fn build_corpus() -> (Vec<Case>, f64, Vec<String>) {
    let tol = Tolerance::default();
    let start = Instant::now();
    let mut cases = Vec::new();
    let mut errors = Vec::new();
    for seed in 0..CORPUS as u64 {
        let (triple, potential) = corpus_case(seed);
        match gbdt_iterate(&triple, &potential, CORPUS_STEPS, &tol) {
            Ok(seq) => {
                let grid = auto_z_grid(seq.alpha(), &tol);
                cases.push(Case { seed, seq, grid });
            }
            Err(e) => errors.push(format!("seed {seed}: {e}")),
        }
    }
    (cases, start.elapsed().as_secs_f64(), errors)
}

fn criterion_identity_chain(cases: &[Case], secs: f64, errors: &[String]) -> Outcome {
    let mut worst = Worst::default();
    for case in cases {
        for d in case.seq.diagnostics() {
            worst.observe(d.identity_residual, 1e-9 * (1 + d.k) as f64, || format!("seed {} k {}", case.seed, d.k));
        }
    }
    let shapes: std::collections::BTreeSet<(usize, usize)> =
        cases.iter().map(|c| (c.seq.triple().n(), c.seq.triple().m())).collect();
    Outcome::new(
        errors.is_empty() && cases.len() == CORPUS && worst.ok() && secs < 10.0,
        format!(
            "{} triples, {} (n, m) shapes, {}; iteration {secs:.3}s{}",
            cases.len(),
            shapes.len(),
            worst.describe(),
            if errors.is_empty() { String::new() } else { format!("; errors: {errors:?}") }
        ),
    )
}

fn criterion_involution(cases: &[Case]) -> Outcome {
    let mut inv = Worst::default();
    let mut herm = Worst::default();
    let id = |m| ComplexMatrix::identity(m);
    for case in cases {
        for k in 0..case.seq.steps() {
            let ct = case.seq.c_tilde(k);
            let bound = 1e-9 * (1 + k) as f64;
            let at = || format!("seed {} k {k}", case.seed);
            inv.observe((&(ct * ct) - &id(ct.rows())).frobenius_norm(), bound, at);
            herm.observe((ct - &ct.adjoint()).frobenius_norm(), bound, at);
        }
    }
    Outcome::new(
        !cases.is_empty() && inv.ok() && herm.ok(),
        format!("involution {}; hermitian {}", inv.describe(), herm.describe()),
    )
}

fn criterion_positivity(cases: &[Case]) -> Outcome {
    let tol = Tolerance::default();
    let mut failures = Vec::new();
    let mut checked = 0;
    for case in cases {
        for k in 0..=case.seq.steps() {
            checked += 1;
            if cholesky(case.seq.s(k), &tol).is_err() {
                failures.push(format!("seed {} k {k}", case.seed));
            }
        }
    }
    Outcome::new(
        !cases.is_empty() && failures.is_empty(),
        format!("{checked} Cholesky factorizations, failures {failures:?}"),
    )
}

fn criterion_conjugation(cases: &[Case]) -> Outcome {
    let mut worst = Worst::default();
    let mut errors = Vec::new();
    for case in cases {
        for &z in &case.grid {
            let pair = transformed_fundamental_direct(&case.seq, z, CORPUS_STEPS)
                .and_then(|d| Ok((d, transformed_fundamental_darboux(&case.seq, z, CORPUS_STEPS)?)));
            match pair {
                Ok((direct, darboux)) => {
                    for k in 0..=CORPUS_STEPS {
                        let diff = direct.values[k].max_abs_diff(&darboux.values[k]);
                        worst.observe(diff, 1e-8 * (1 + k) as f64, || format!("seed {} z {z} k {k}", case.seed));
                    }
                }
                Err(e) => errors.push(format!("seed {} z {z}: {e}", case.seed)),
            }
        }
    }
    let sizes: std::collections::BTreeSet<usize> = cases.iter().map(|c| c.grid.len()).collect();
    Outcome::new(
        !cases.is_empty() && errors.is_empty() && worst.ok() && sizes.iter().all(|&s| s == 12),
        format!("z per triple {sizes:?}, {}{}", worst.describe(), fmt_errors(&errors)),
    )
}

fn fmt_errors(errors: &[String]) -> String {
    if errors.is_empty() {
        String::new()
    } else {
        format!("; {} errors, first: {}", errors.len(), errors[0])
    }
}

fn criterion_intertwining(cases: &[Case]) -> Outcome {
    let mut worst = Worst::default();
    let mut errors = Vec::new();
    for case in cases {
        for &z in &case.grid {
            for k in 0..CORPUS_STEPS {
                match intertwining_residual(&case.seq, k, z) {
                    Ok(r) => worst.observe(r, 1e-9, || format!("seed {} z {z} k {k}", case.seed)),
                    Err(e) => errors.push(format!("seed {} z {z} k {k}: {e}", case.seed)),
                }
            }
        }
    }
    Outcome::new(
        !cases.is_empty() && errors.is_empty() && worst.ok(),
        format!("{}{}", worst.describe(), fmt_errors(&errors)),
    )
}

fn criterion_transfer_inverse(cases: &[Case]) -> Outcome {
    let mut worst = Worst::default();
    let mut errors = Vec::new();
    for case in cases {
        for &z in &case.grid {
            for k in 0..=CORPUS_STEPS {
                match transfer_inverse_residual(&case.seq, k, z) {
                    Ok(r) => worst.observe(r, 1e-10, || format!("seed {} z {z} k {k}", case.seed)),
                    Err(e) => errors.push(format!("seed {} z {z} k {k}: {e}", case.seed)),
                }
            }
        }
    }
    Outcome::new(
        !cases.is_empty() && errors.is_empty() && worst.ok(),
        format!("{}{}", worst.describe(), fmt_errors(&errors)),
    )
}

fn criterion_unitary_factor(cases: &[Case]) -> Outcome {
    let mut unitary = Worst::default();
    let mut repr = Worst::default();
    let mut errors = Vec::new();
    let mut min_q = f64::INFINITY;
    let mut count = 0;
    for case in cases {
        match unitary_factors(&case.seq) {
            Ok(factors) => {
                for f in factors {
                    count += 1;
                    let at = || format!("seed {} k {}", case.seed, f.k);
                    unitary.observe(f.unitarity_defect, 1e-9, at);
                    repr.observe(f.representation_defect, 1e-9, at);
                    min_q = min_q.min(f.q_breve_min_eigenvalue).min(f.q_hat_min_eigenvalue);
                    let herm = (&f.q_breve - &f.q_breve.adjoint()).frobenius_norm()
                        + (&f.q_hat - &f.q_hat.adjoint()).frobenius_norm();
                    if herm > 0.0 || cholesky(&f.q_breve, &Tolerance::default()).is_err()
                        || cholesky(&f.q_hat, &Tolerance::default()).is_err()
                    {
                        errors.push(format!("seed {} k {}: q not Hermitian positive definite", case.seed, f.k));
                    }
                }
            }
            Err(e) => errors.push(format!("seed {}: {e}", case.seed)),
        }
    }
    Outcome::new(
        count > 0 && errors.is_empty() && unitary.ok() && repr.ok() && min_q > 0.0,
        format!(
            "{count} factors; unitarity {}; representation {}; min eigenvalue of q {min_q:.3e}{}",
            unitary.describe(),
            repr.describe(),
            fmt_errors(&errors)
        ),
    )
}

fn criterion_nonstationary(cases: &[Case]) -> Outcome {
    let tol = Tolerance::default();
    let mut residual = Worst::default();
    let mut spread = Worst::default();
    let mut order_failures = Vec::new();
    let mut errors = Vec::new();
    for case in cases {
        let gen = match build_generator(&case.seq, NONSTATIONARY_STEPS) {
            Ok(g) => g,
            Err(e) => {
                errors.push(format!("seed {}: {e}", case.seed));
                continue;
            }
        };
        let grid = default_t_grid(case.seq.alpha());
        let tables: Vec<_> = match grid.iter().map(|&t| nonstationary_residual(&gen, t)).collect() {
            Ok(t) => t,
            Err(e) => {
                errors.push(format!("seed {}: {e}", case.seed));
                continue;
            }
        };
        for k in 0..NONSTATIONARY_STEPS {
            let rs: Vec<f64> = tables.iter().map(|tab: &Vec<_>| tab[k].residual).collect();
            for (ti, &r) in rs.iter().enumerate() {
                residual.observe(r, 1e-8, || format!("seed {} k {k} t {}", case.seed, grid[ti]));
            }
            let max = rs.iter().copied().fold(0.0, f64::max);
            let min = rs.iter().copied().fold(f64::INFINITY, f64::min);
            spread.observe(max, 10.0 * min.max(tol.abs), || format!("seed {} k {k}", case.seed));
        }
        let norm = case.seq.alpha().frobenius_norm();
        let h = 1e-2 * if norm > 1.0 { 1.0 / norm } else { 1.0 };
        let t = grid[grid.len() - 1];
        let worst_at = |h: f64| {
            finite_difference_check(&gen, t, h).map(|v| v.iter().map(|d| d.max()).fold(0.0, f64::max))
        };
        match (worst_at(h), worst_at(h / 2.0)) {
            (Ok(a), Ok(b)) => {
                let ratio = a / b;
                if !(3.5..=4.5).contains(&ratio) {
                    order_failures.push(format!("seed {}: ratio {ratio:.3}", case.seed));
                }
            }
            (Err(e), _) | (_, Err(e)) => errors.push(format!("seed {}: {e}", case.seed)),
        }
    }
    Outcome::new(
        !cases.is_empty() && errors.is_empty() && residual.ok() && spread.ok() && order_failures.is_empty(),
        format!(
            "residual {}; t-spread {}; order failures {order_failures:?}{}",
            residual.describe(),
            spread.describe(),
            fmt_errors(&errors)
        ),
    )
}

fn criterion_degeneracy() -> Outcome {
    let tol = Tolerance::default();
    let mut c_err: f64 = 0.0;
    let mut w_err: f64 = 0.0;
    let mut errors = Vec::new();
    for seed in 0..10u64 {
        let n = 1 + seed as usize % 4;
        let m = 2 + seed as usize % 3;
        // Hermitian α with eigenvalues in [1, 3] keeps 0 and i out of σ(α).
        let u = random_unitary(n, seed).unwrap();
        let d: Vec<Complex64> = (0..n).map(|i| c(1.0 + 2.0 * i as f64 / n as f64, 0.)).collect();
        let alpha = (&(&u * &ComplexMatrix::from_diagonal(&d)) * &u.adjoint()).hermitian_part();
        let sig = SignatureSpec::new(1, m - 1).unwrap();
        let potential = random_unitary_potential(sig, 20, seed + 50, &tol).unwrap();
        let seq = match gbdt_iterate(&zero_data_triple(alpha, m).unwrap(), &potential, 20, &tol) {
            Ok(s) => s,
            Err(e) => {
                errors.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        for k in 0..20 {
            c_err = c_err.max((seq.c_tilde(k) - potential.c(k)).frobenius_norm());
        }
        for &z in &auto_z_grid(seq.alpha(), &tol) {
            for k in 0..=20 {
                match darboux_matrix(&seq, k, z) {
                    Ok(w) => w_err = w_err.max((&w.matrix - &ComplexMatrix::identity(m)).frobenius_norm()),
                    Err(e) => errors.push(format!("seed {seed} z {z}: {e}")),
                }
            }
            let w = fundamental_solution(&potential, z, 20).unwrap();
            let wt = transformed_fundamental_darboux(&seq, z, 20).unwrap();
            for k in 0..=20 {
                w_err = w_err.max(w.values[k].max_abs_diff(&wt.values[k]) / w.values[k].max_abs().max(1.0));
            }
        }
    }
    Outcome::new(
        errors.is_empty() && c_err <= 1e-13 && w_err <= 1e-13,
        format!("|C̃_k − C_k| {c_err:.3e}, |w_α − I| {w_err:.3e}{}", fmt_errors(&errors)),
    )
}

fn criterion_cli() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_dirac-gbdt");
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/scalar.json");
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let mut outputs = Vec::new();
    let mut codes = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let status = Command::new(bin)
            .args(["run", "--problem", fixture, "--omit-timings", "--out"])
            .arg(&out)
            .status()
            .expect("binary runs");
        codes.push(status.code());
        outputs.push(std::fs::read(&out).unwrap_or_default());
    }
    let elapsed = start.elapsed().as_secs_f64() / 2.0;
    let text = String::from_utf8_lossy(&outputs[0]);
    let verdict = text.contains(r#""verdict": "pass""#);
    let stable = outputs[0] == outputs[1] && !outputs[0].is_empty();
    Outcome::new(
        codes.iter().all(|&c| c == Some(0)) && verdict && stable && elapsed < 5.0,
        format!("exit codes {codes:?}, verdict pass {verdict}, byte-stable {stable}, runtime {elapsed:.3}s per run"),
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let (cases, secs, errors) = build_corpus();
    let criteria: Vec<Criterion> = vec![
        ("scalar fixture", Box::new(criterion_scalar_fixture)),
        ("identity chain", Box::new(|| criterion_identity_chain(&cases, secs, &errors))),
        ("involution and hermitian symmetry", Box::new(|| criterion_involution(&cases))),
        ("positivity of S_k", Box::new(|| criterion_positivity(&cases))),
        ("conjugation oracle", Box::new(|| criterion_conjugation(&cases))),
        ("intertwining", Box::new(|| criterion_intertwining(&cases))),
        ("transfer-matrix inverse", Box::new(|| criterion_transfer_inverse(&cases))),
        ("unitary factorization", Box::new(|| criterion_unitary_factor(&cases))),
        ("non-stationary solution", Box::new(|| criterion_nonstationary(&cases))),
        ("zero-data degeneracy", Box::new(criterion_degeneracy)),
        ("end-to-end CLI", Box::new(criterion_cli)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "acceptance {:>2} {:<34} {}  {}",
            i + 1,
            name,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
