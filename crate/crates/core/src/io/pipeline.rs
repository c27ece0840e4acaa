use std::time::Instant;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use super::ProblemSpec;
use crate::dirac::{validate_potential, DiracError, DiracPotential, PotentialReport};
use crate::gbdt::{
    gbdt_iterate, intertwining_residual, transfer_inverse_residual, transformed_fundamental_darboux,
    transformed_fundamental_direct, unitary_factors, AdmissibilityReport, GbdtError, GbdtSequence, GbdtTriple, Mode,
    StepDiagnostics,
};
use crate::linalg::{smallest_singular_value, spectrum_diagnostic, ComplexMatrix, LinalgError, Tolerance};
use crate::nonstationary::{
    build_generator, default_t_grid, finite_difference_check, nonstationary_residual, BlockResidual,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Validate,
    Iterate,
    Darboux,
    Fundamental,
    Factorize,
    Nonstationary,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Validate,
        Stage::Iterate,
        Stage::Darboux,
        Stage::Fundamental,
        Stage::Factorize,
        Stage::Nonstationary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Validate => "validate",
            Stage::Iterate => "iterate",
            Stage::Darboux => "darboux",
            Stage::Fundamental => "fundamental",
            Stage::Factorize => "factorize",
            Stage::Nonstationary => "nonstationary",
        }
    }

    fn dependency(self) -> Option<Stage> {
        match self {
            Stage::Validate => None,
            Stage::Iterate => Some(Stage::Validate),
            _ => Some(Stage::Iterate),
        }
    }
}

/// Requested stages plus their dependencies, in execution order.
fn resolve(stages: &[Stage]) -> Vec<Stage> {
    let mut out: Vec<Stage> = Vec::new();
    for &s in stages {
        let mut cur = Some(s);
        while let Some(c) = cur {
            if !out.contains(&c) {
                out.push(c);
            }
            cur = c.dependency();
        }
    }
    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Process exit status: 0 pass, 1 verdict fail, 2 numerical breakdown,
/// 3 parse or spec error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass,
    VerdictFail,
    NumericalBreakdown,
    SpecError,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::VerdictFail => 1,
            ExitStatus::NumericalBreakdown => 2,
            ExitStatus::SpecError => 3,
        }
    }

    fn kind(self) -> &'static str {
        match self {
            ExitStatus::Pass => "none",
            ExitStatus::VerdictFail => "verdict",
            ExitStatus::NumericalBreakdown => "numerical-breakdown",
            ExitStatus::SpecError => "spec",
        }
    }
}

impl Serialize for ExitStatus {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i32(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageFailure {
    pub stage: String,
    pub kind: &'static str,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRow {
    #[serde(flatten)]
    pub diagnostics: StepDiagnostics,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarbouxRow {
    pub z: [f64; 2],
    pub k: usize,
    /// Absent at `k = K`, which has no following step.
    pub intertwining_residual: Option<f64>,
    pub intertwining_bound: f64,
    pub transfer_inverse_residual: f64,
    pub transfer_inverse_bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugationRow {
    pub z: [f64; 2],
    pub k: usize,
    /// Entrywise maximum of `|w̃_direct − w̃_darboux|`.
    pub agreement: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorRow {
    pub k: usize,
    pub w_matrix: ComplexMatrix,
    pub q_breve_residual: f64,
    pub q_hat_residual: f64,
    pub q_breve_min_eigenvalue: f64,
    pub q_hat_min_eigenvalue: f64,
    pub unitarity_defect: f64,
    pub representation_defect: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationSection {
    pub skipped: Option<String>,
    pub factors: Vec<FactorRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeIndependenceRow {
    pub k: usize,
    pub max: f64,
    pub min: f64,
    /// `max ≤ 10·max(min, abs)`.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteDifferenceSummary {
    pub t: f64,
    pub h: f64,
    pub discrepancy: f64,
    pub discrepancy_half_step: f64,
    /// Ratio of the two discrepancies; `None` when both are at rounding level.
    pub ratio: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonstationarySection {
    pub bound: f64,
    pub y_residual_max: f64,
    pub rows: Vec<BlockResidual>,
    pub time_independence: Vec<TimeIndependenceRow>,
    pub finite_difference: FiniteDifferenceSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub artifact: Artifact,
    pub problem: Option<ProblemSpec>,
    pub stages: Vec<Stage>,
    pub z_grid: Vec<[f64; 2]>,
    pub t_grid: Vec<f64>,
    pub potential: Option<PotentialReport>,
    pub admissibility: Option<AdmissibilityReport>,
    pub steps: Option<Vec<StepRow>>,
    pub c_tilde: Option<Vec<ComplexMatrix>>,
    pub darboux: Option<Vec<DarbouxRow>>,
    pub fundamental: Option<Vec<ConjugationRow>>,
    pub factorization: Option<FactorizationSection>,
    pub nonstationary: Option<NonstationarySection>,
    pub failed_checks: Vec<String>,
    pub failure: Option<StageFailure>,
    pub verdict: Verdict,
    pub exit_code: ExitStatus,
    pub timings: Option<Vec<StageTiming>>,
}

impl RunReport {
    fn new(problem: Option<ProblemSpec>) -> Self {
        Self {
            artifact: Artifact {
                name: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
            },
            problem,
            stages: Vec::new(),
            z_grid: Vec::new(),
            t_grid: Vec::new(),
            potential: None,
            admissibility: None,
            steps: None,
            c_tilde: None,
            darboux: None,
            fundamental: None,
            factorization: None,
            nonstationary: None,
            failed_checks: Vec::new(),
            failure: None,
            verdict: Verdict::Pass,
            exit_code: ExitStatus::Pass,
            timings: None,
        }
    }

    /// Report for input that never produced a valid problem.
    pub fn spec_error(error: &impl std::fmt::Display) -> Self {
        let mut r = Self::new(None);
        r.record_failure("parse", ExitStatus::SpecError, error);
        r.finish();
        r
    }

    pub fn exit_status(&self) -> ExitStatus {
        self.exit_code
    }

    fn record_failure(&mut self, stage: &str, status: ExitStatus, error: &impl std::fmt::Display) {
        self.failure = Some(StageFailure {
            stage: stage.to_string(),
            kind: status.kind(),
            error: error.to_string(),
        });
        self.exit_code = status;
    }

    fn finish(&mut self) {
        if self.failure.is_none() {
            self.exit_code = if self.failed_checks.is_empty() {
                ExitStatus::Pass
            } else {
                ExitStatus::VerdictFail
            };
        }
        self.verdict = if self.exit_code == ExitStatus::Pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }
}

fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Twelve spectral parameters: four real, four in each open half-plane.
///
/// Every `w ∈ {z, −z, z̄, −z̄}` keeps distance at least `0.1·‖α‖_F` from the
/// eigenvalue estimates of `α` and from 0; when estimates are unavailable
/// `σ_min(α − wI) ≥ 0.1·‖α‖_F` is required instead, which implies the same
/// distance. Candidate radii grow until the condition holds, which it does
/// once the radius exceeds `1.1·‖α‖_F`.
pub fn auto_z_grid(alpha: &ComplexMatrix, tol: &Tolerance) -> Vec<Complex64> {
    use std::f64::consts::PI;
    let norm = alpha.frobenius_norm();
    let delta = 0.1 * norm;
    let scale = (norm / 5.0).max(1.0);
    let estimates = spectrum_diagnostic(alpha, tol).ok().map(|e| e.values);
    let clear = |w: Complex64| match &estimates {
        Some(values) => values.iter().all(|l| (l - w).norm() >= delta),
        None => smallest_singular_value(&alpha.shift_diagonal(-w)).is_ok_and(|s| s >= delta),
    };
    let admissible = |z: Complex64| [z, -z, z.conj(), -z.conj()].into_iter().all(|w| w.norm() >= delta && clear(w));
    let bases: [(f64, f64); 12] = [
        (2.0, 0.0),
        (3.0, PI),
        (4.0, 0.0),
        (5.0, PI),
        (2.5, 0.2 * PI),
        (3.5, 0.4 * PI),
        (4.5, 0.6 * PI),
        (3.0, 0.8 * PI),
        (2.5, -0.15 * PI),
        (3.5, -0.35 * PI),
        (4.5, -0.65 * PI),
        (3.0, -0.85 * PI),
    ];
    bases
        .iter()
        .map(|&(r, theta)| {
            let mut radius = r * scale;
            loop {
                let z = Complex64::from_polar(radius, theta);
                let z = if theta == 0.0 || theta == PI { Complex64::new(z.re, 0.0) } else { z };
                if admissible(z) {
                    return z;
                }
                radius *= 1.15;
            }
        })
        .collect()
}

fn gbdt_status(e: &GbdtError) -> ExitStatus {
    match e {
        GbdtError::Inadmissible(_) => ExitStatus::VerdictFail,
        GbdtError::SingularS(_)
        | GbdtError::NumericalBreakdown { .. }
        | GbdtError::FactorizationFailure { .. }
        | GbdtError::Linalg(_) => ExitStatus::NumericalBreakdown,
        _ => ExitStatus::SpecError,
    }
}

fn dirac_status(e: &DiracError) -> ExitStatus {
    match e {
        DiracError::Linalg(LinalgError::Overflow { .. } | LinalgError::NoConvergence { .. }) => {
            ExitStatus::NumericalBreakdown
        }
        _ => ExitStatus::SpecError,
    }
}

struct Context<'a> {
    spec: &'a ProblemSpec,
    tol: Tolerance,
    potential: Option<DiracPotential>,
    triple: Option<GbdtTriple>,
    seq: Option<GbdtSequence>,
    z_grid: Vec<Complex64>,
    t_grid: Vec<f64>,
}

type StageResult = Result<(), (ExitStatus, String)>;

/// Run the requested stages and their dependencies in order.
///
/// The report is complete even when a stage fails: the failing stage, the
/// error and the exit status are recorded and later stages are skipped.
pub fn run_pipeline(spec: &ProblemSpec, stages: &[Stage], record_timings: bool) -> RunReport {
    let mut report = RunReport::new(Some(spec.clone()));
    let stages = resolve(stages);
    report.stages = stages.clone();
    let tol = spec.tolerance();
    let alpha = &spec.triple.alpha;
    let mut ctx = Context {
        spec,
        tol,
        potential: None,
        triple: None,
        seq: None,
        z_grid: spec.explicit_z_grid().unwrap_or_else(|| auto_z_grid(alpha, &tol)),
        t_grid: spec.explicit_t_grid().unwrap_or_else(|| default_t_grid(alpha)),
    };
    report.z_grid = ctx.z_grid.iter().map(|&z| complex_pair(z)).collect();
    report.t_grid = ctx.t_grid.clone();
    let mut timings = Vec::new();
    for stage in stages {
        let start = Instant::now();
        let outcome = match stage {
            Stage::Validate => stage_validate(&mut ctx, &mut report),
            Stage::Iterate => stage_iterate(&mut ctx, &mut report),
            Stage::Darboux => stage_darboux(&ctx, &mut report),
            Stage::Fundamental => stage_fundamental(&ctx, &mut report),
            Stage::Factorize => stage_factorize(&ctx, &mut report),
            Stage::Nonstationary => stage_nonstationary(&ctx, &mut report),
        };
        timings.push(StageTiming {
            stage,
            seconds: start.elapsed().as_secs_f64(),
        });
        if let Err((status, message)) = outcome {
            report.record_failure(stage.name(), status, &message);
            break;
        }
    }
    if record_timings {
        report.timings = Some(timings);
    }
    report.finish();
    report
}

fn stage_validate(ctx: &mut Context<'_>, report: &mut RunReport) -> StageResult {
    let potential = ctx
        .spec
        .build_potential()
        .map_err(|e| (dirac_status(&e), e.to_string()))?;
    let check = validate_potential(&potential, &ctx.tol);
    for s in check.steps.iter().filter(|s| !s.passes()) {
        report.failed_checks.push(format!(
            "potential C_{}: hermitian {:e}, involution {:e}, representation {:?} (bound {:e})",
            s.k, s.hermitian, s.involution, s.representation, s.bound
        ));
    }
    report.potential = Some(check);
    ctx.potential = Some(potential);

    let triple = ctx.spec.build_triple().map_err(|e| (ExitStatus::SpecError, e.to_string()))?;
    let adm = triple.validate(&ctx.tol).map_err(|e| (gbdt_status(&e), e.to_string()))?;
    let admissible = adm.admissible;
    for f in &adm.failures {
        report.failed_checks.push(format!("admissibility: {f}"));
    }
    report.admissibility = Some(adm);
    ctx.triple = Some(triple);
    if !admissible {
        return Err((ExitStatus::VerdictFail, "triple is not admissible".into()));
    }
    Ok(())
}

fn failed_step_fields(d: &StepDiagnostics) -> Vec<String> {
    let mut out = Vec::new();
    let mut check = |name: &str, v: Option<f64>| {
        if let Some(v) = v.filter(|&v| v > d.bound) {
            out.push(format!("step {}: {name} {v:e} > {:e}", d.k, d.bound));
        }
    };
    check("identity_residual", Some(d.identity_residual));
    check("involution_residual", d.involution_residual);
    check("c_tilde_hermitian_residual", d.c_tilde_hermitian_residual);
    check("inertia_defect", d.inertia_defect);
    if d.s_positive_definite == Some(false) {
        out.push(format!("step {}: S_k is not positive definite", d.k));
    }
    out
}

fn stage_iterate(ctx: &mut Context<'_>, report: &mut RunReport) -> StageResult {
    let (triple, potential) = match (&ctx.triple, &ctx.potential) {
        (Some(t), Some(p)) => (t, p),
        _ => return Err((ExitStatus::SpecError, "validation did not complete".into())),
    };
    let seq = gbdt_iterate(triple, potential, ctx.spec.run.steps, &ctx.tol).map_err(|e| (gbdt_status(&e), e.to_string()))?;
    let rows = seq
        .diagnostics()
        .iter()
        .map(|d| {
            report.failed_checks.extend(failed_step_fields(d));
            StepRow {
                diagnostics: d.clone(),
                pass: d.passes(),
            }
        })
        .collect();
    report.steps = Some(rows);
    report.c_tilde = Some(seq.c_tilde_all().to_vec());
    ctx.seq = Some(seq);
    Ok(())
}

fn sequence<'c>(ctx: &'c Context<'_>) -> Result<&'c GbdtSequence, (ExitStatus, String)> {
    ctx.seq
        .as_ref()
        .ok_or_else(|| (ExitStatus::SpecError, "the recursion did not run".to_string()))
}

fn stage_darboux(ctx: &Context<'_>, report: &mut RunReport) -> StageResult {
    let seq = sequence(ctx)?;
    let k_max = seq.steps();
    let inter_bound = ctx.tol.step_bound(0);
    let transfer_bound = ctx.tol.rel;
    let mut rows = Vec::new();
    for &z in &ctx.z_grid {
        for k in 0..=k_max {
            let inter = if k < k_max {
                Some(intertwining_residual(seq, k, z).map_err(|e| (gbdt_status(&e), e.to_string()))?)
            } else {
                None
            };
            let transfer = transfer_inverse_residual(seq, k, z).map_err(|e| (gbdt_status(&e), e.to_string()))?;
            let pass = inter.is_none_or(|r| r <= inter_bound) && transfer <= transfer_bound;
            if !pass {
                report.failed_checks.push(format!(
                    "darboux z = {z}, k = {k}: intertwining {inter:?}, transfer inverse {transfer:e}"
                ));
            }
            rows.push(DarbouxRow {
                z: complex_pair(z),
                k,
                intertwining_residual: inter,
                intertwining_bound: inter_bound,
                transfer_inverse_residual: transfer,
                transfer_inverse_bound: transfer_bound,
                pass,
            });
        }
    }
    report.darboux = Some(rows);
    Ok(())
}

fn stage_fundamental(ctx: &Context<'_>, report: &mut RunReport) -> StageResult {
    let seq = sequence(ctx)?;
    let steps = seq.steps();
    let mut rows = Vec::new();
    for &z in &ctx.z_grid {
        let direct = transformed_fundamental_direct(seq, z, steps).map_err(|e| (gbdt_status(&e), e.to_string()))?;
        let darboux = transformed_fundamental_darboux(seq, z, steps).map_err(|e| (gbdt_status(&e), e.to_string()))?;
        for (k, (a, b)) in direct.values.iter().zip(&darboux.values).enumerate() {
            let agreement = a.max_abs_diff(b);
            let bound = 100.0 * ctx.tol.rel * (1 + k) as f64;
            let pass = agreement <= bound;
            if !pass {
                report
                    .failed_checks
                    .push(format!("conjugation z = {z}, k = {k}: {agreement:e} > {bound:e}"));
            }
            rows.push(ConjugationRow {
                z: complex_pair(z),
                k,
                agreement,
                bound,
                pass,
            });
        }
    }
    report.fundamental = Some(rows);
    Ok(())
}

fn stage_factorize(ctx: &Context<'_>, report: &mut RunReport) -> StageResult {
    let seq = sequence(ctx)?;
    let skipped = if seq.mode() != Mode::Strict {
        Some("unitary factors require a strict-mode triple")
    } else if seq.potential().u_matrices().is_none() {
        Some("the initial potential carries no generating unitaries")
    } else {
        None
    };
    if let Some(reason) = skipped {
        report.factorization = Some(FactorizationSection {
            skipped: Some(reason.into()),
            factors: Vec::new(),
        });
        return Ok(());
    }
    let factors = unitary_factors(seq).map_err(|e| (gbdt_status(&e), e.to_string()))?;
    let rows = factors
        .into_iter()
        .map(|f| {
            let pass = f.passes();
            if !pass {
                report.failed_checks.push(format!(
                    "factor k = {}: unitarity {:e}, representation {:e} (bound {:e})",
                    f.k, f.unitarity_defect, f.representation_defect, f.bound
                ));
            }
            FactorRow {
                k: f.k,
                w_matrix: f.w_matrix,
                q_breve_residual: f.q_breve_residual,
                q_hat_residual: f.q_hat_residual,
                q_breve_min_eigenvalue: f.q_breve_min_eigenvalue,
                q_hat_min_eigenvalue: f.q_hat_min_eigenvalue,
                unitarity_defect: f.unitarity_defect,
                representation_defect: f.representation_defect,
                bound: f.bound,
                pass,
            }
        })
        .collect();
    report.factorization = Some(FactorizationSection {
        skipped: None,
        factors: rows,
    });
    Ok(())
}

fn stage_nonstationary(ctx: &Context<'_>, report: &mut RunReport) -> StageResult {
    let seq = sequence(ctx)?;
    let err = |e: GbdtError| (gbdt_status(&e), e.to_string());
    let gen = build_generator(seq, seq.steps()).map_err(err)?;
    let bound = 100.0 * ctx.tol.rel;
    let mut rows = Vec::new();
    for &t in &ctx.t_grid {
        rows.extend(nonstationary_residual(&gen, t).map_err(err)?);
    }
    for r in rows.iter().filter(|r| r.residual > bound) {
        report
            .failed_checks
            .push(format!("nonstationary k = {}, t = {}: {:e} > {bound:e}", r.k, r.t, r.residual));
    }
    let floor = ctx.tol.abs;
    let time_independence: Vec<TimeIndependenceRow> = (0..gen.steps())
        .map(|k| {
            let vals = rows.iter().filter(|r| r.k == k).map(|r| r.residual);
            let max = vals.clone().fold(0.0, f64::max);
            let min = vals.fold(f64::INFINITY, f64::min);
            let pass = max <= 10.0 * min.max(floor);
            TimeIndependenceRow { k, max, min, pass }
        })
        .collect();
    for row in time_independence.iter().filter(|r| !r.pass) {
        report.failed_checks.push(format!(
            "nonstationary k = {}: residual varies in t ({:e} to {:e})",
            row.k, row.min, row.max
        ));
    }
    let alpha_norm = seq.alpha().frobenius_norm();
    let h = 1e-2 * if alpha_norm > 1.0 { 1.0 / alpha_norm } else { 1.0 };
    let t = ctx.t_grid.iter().copied().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
    let fd = finite_difference_summary(&gen, t, h).map_err(err)?;
    if !fd.pass {
        report
            .failed_checks
            .push(format!("finite differences at t = {t}: ratio {:?} outside [3.5, 4.5]", fd.ratio));
    }
    let y_residual_max = (0..=gen.steps()).map(|k| gen.y_residual(k)).fold(0.0, f64::max);
    report.nonstationary = Some(NonstationarySection {
        bound,
        y_residual_max,
        rows,
        time_independence,
        finite_difference: fd,
    });
    Ok(())
}

/// Second-order convergence check: halving `h` divides the largest
/// discrepancy by about 4.
pub(crate) fn finite_difference_summary(
    gen: &crate::nonstationary::SolutionGenerator<'_>,
    t: f64,
    h: f64,
) -> Result<FiniteDifferenceSummary, GbdtError> {
    let worst = |h: f64| -> Result<f64, GbdtError> {
        Ok(finite_difference_check(gen, t, h)?.iter().map(|d| d.max()).fold(0.0, f64::max))
    };
    let (d1, d2) = (worst(h)?, worst(h / 2.0)?);
    let size = gen.y_blocks().iter().map(ComplexMatrix::frobenius_norm).fold(0.0, f64::max);
    let rounding = 1e-10 * size.max(1.0);
    let (ratio, pass) = if d1 <= rounding && d2 <= rounding {
        (None, true)
    } else {
        let r = d1 / d2;
        (Some(r), (3.5..=4.5).contains(&r))
    };
    Ok(FiniteDifferenceSummary {
        t,
        h,
        discrepancy: d1,
        discrepancy_half_step: d2,
        ratio,
        pass,
    })
}
