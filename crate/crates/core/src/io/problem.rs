use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::IoError;
use crate::dirac::{random_unitary_potential, DiracError, DiracPotential, SignatureSpec};
use crate::gbdt::{GbdtError, GbdtTriple, Mode};
use crate::linalg::{ComplexMatrix, Tolerance};

const GENERATORS: [&str; 4] = ["constant-j", "unitary-list", "random-unitary", "explicit-c-list"];

/// A problem file: signature, potential generator, GBDT triple and run
/// parameters. Complex scalars are `[re, im]`; matrices are nested
/// row-major arrays of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub signature: SignatureSpec,
    pub potential: PotentialSpec,
    pub triple: TripleSpec,
    pub run: RunSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `C_k ≡ j`, generated by `U_k ≡ I`.
    ConstantJ {},
    UnitaryList {
        #[serde(rename = "U")]
        u: Vec<ComplexMatrix>,
    },
    /// `U_k = random_unitary(m, seed + k)` for `k < K`; `K` defaults to
    /// `run.steps`.
    RandomUnitary {
        seed: u64,
        #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
    },
    ExplicitCList {
        #[serde(rename = "C")]
        c: Vec<ComplexMatrix>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSpec {
    pub alpha: ComplexMatrix,
    pub s0: ComplexMatrix,
    pub lambda0: ComplexMatrix,
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[default]
    #[serde(rename = "auto")]
    Auto,
}

/// Spectral parameters: `"auto"` or a list of `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Auto(AutoKeyword),
    Points(Vec<[f64; 2]>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Auto(AutoKeyword::Auto)
    }
}

/// Sample times: `"auto"` or a list of reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TGridSpec {
    Auto(AutoKeyword),
    Points(Vec<f64>),
}

impl Default for TGridSpec {
    fn default() -> Self {
        TGridSpec::Auto(AutoKeyword::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub steps: usize,
    #[serde(default)]
    pub z_grid: GridSpec,
    #[serde(default)]
    pub t_grid: TGridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerance>,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub rel: Option<f64>,
    pub abs: Option<f64>,
}

impl ProblemSpec {
    pub fn n(&self) -> usize {
        self.triple.alpha.rows()
    }

    pub fn m(&self) -> usize {
        self.signature.m()
    }

    pub fn tolerance(&self) -> Tolerance {
        self.run.tolerances.unwrap_or_default()
    }

    /// Check every cross-field constraint.
    pub fn validate(&self) -> Result<(), IoError> {
        let m = self.m();
        let n = self.triple.alpha.rows();
        let t = &self.triple;
        if !t.alpha.is_square() {
            return Err(IoError::dimension(
                "triple.alpha",
                format!("must be square, got {}x{}", t.alpha.rows(), t.alpha.cols()),
            ));
        }
        if t.s0.shape() != (n, n) {
            return Err(IoError::dimension(
                "triple.s0",
                format!("must be {n}x{n}, got {}x{}", t.s0.rows(), t.s0.cols()),
            ));
        }
        if t.lambda0.shape() != (n, m) {
            return Err(IoError::dimension(
                "triple.lambda0",
                format!(
                    "must be {n}x{m} (n from alpha, m = m1 + m2), got {}x{}",
                    t.lambda0.rows(),
                    t.lambda0.cols()
                ),
            ));
        }
        let steps = self.run.steps;
        if steps == 0 {
            return Err(IoError::invalid("run.steps", "must be at least 1"));
        }
        match &self.potential {
            PotentialSpec::ConstantJ {} => {}
            PotentialSpec::UnitaryList { u: list } | PotentialSpec::ExplicitCList { c: list } => {
                let name = if matches!(self.potential, PotentialSpec::UnitaryList { .. }) { "U" } else { "C" };
                for (k, mat) in list.iter().enumerate() {
                    if mat.shape() != (m, m) {
                        return Err(IoError::dimension(
                            format!("potential.{name}[{k}]"),
                            format!("must be {m}x{m}, got {}x{}", mat.rows(), mat.cols()),
                        ));
                    }
                }
                if list.len() < steps {
                    return Err(IoError::invalid(
                        format!("potential.{name}"),
                        format!("provides {} steps but run.steps = {steps}", list.len()),
                    ));
                }
            }
            PotentialSpec::RandomUnitary { k: Some(k), .. } if *k < steps => {
                return Err(IoError::invalid(
                    "potential.K",
                    format!("provides {k} steps but run.steps = {steps}"),
                ));
            }
            PotentialSpec::RandomUnitary { .. } => {}
        }
        if let GridSpec::Points(points) = &self.run.z_grid {
            if points.is_empty() {
                return Err(IoError::invalid("run.z_grid", "must not be empty"));
            }
            if let Some(p) = points.iter().find(|p| !(p[0].is_finite() && p[1].is_finite()) || (p[0] == 0.0 && p[1] == 0.0)) {
                return Err(IoError::invalid("run.z_grid", format!("entries must be finite and nonzero, got {p:?}")));
            }
        }
        if let TGridSpec::Points(points) = &self.run.t_grid {
            if points.is_empty() {
                return Err(IoError::invalid("run.t_grid", "must not be empty"));
            }
            if points.iter().any(|t| !t.is_finite()) {
                return Err(IoError::invalid("run.t_grid", "entries must be finite"));
            }
        }
        if let Some(tol) = &self.run.tolerances {
            tol.check().map_err(|e| IoError::invalid("run.tolerances", e))?;
        }
        Ok(())
    }

    pub fn apply_overrides(mut self, o: &Overrides) -> Result<Self, IoError> {
        if let Some(steps) = o.steps {
            self.run.steps = steps;
        }
        if let Some(seed) = o.seed {
            match &mut self.potential {
                PotentialSpec::RandomUnitary { seed: s, .. } => *s = seed,
                _ => return Err(IoError::invalid("--seed", "applies only to random-unitary potentials")),
            }
        }
        if o.rel.is_some() || o.abs.is_some() {
            let mut tol = self.tolerance();
            tol.rel = o.rel.unwrap_or(tol.rel);
            tol.abs = o.abs.unwrap_or(tol.abs);
            self.run.tolerances = Some(tol);
        }
        self.validate()?;
        Ok(self)
    }

    /// Spectral parameters listed in `run.z_grid`; `None` for `"auto"`.
    pub fn explicit_z_grid(&self) -> Option<Vec<Complex64>> {
        match &self.run.z_grid {
            GridSpec::Auto(_) => None,
            GridSpec::Points(p) => Some(p.iter().map(|&[re, im]| Complex64::new(re, im)).collect()),
        }
    }

    pub fn explicit_t_grid(&self) -> Option<Vec<f64>> {
        match &self.run.t_grid {
            TGridSpec::Auto(_) => None,
            TGridSpec::Points(p) => Some(p.clone()),
        }
    }

    pub fn build_potential(&self) -> Result<DiracPotential, DiracError> {
        let tol = self.tolerance();
        let steps = self.run.steps;
        let sig = self.signature;
        match &self.potential {
            PotentialSpec::ConstantJ {} => Ok(DiracPotential::constant_j(sig, steps)),
            PotentialSpec::UnitaryList { u } => DiracPotential::from_unitaries(u.clone(), sig, &tol),
            PotentialSpec::RandomUnitary { seed, k } => random_unitary_potential(sig, k.unwrap_or(steps), *seed, &tol),
            PotentialSpec::ExplicitCList { c } => DiracPotential::from_c_matrices(c.clone(), sig, &tol),
        }
    }

    pub fn build_triple(&self) -> Result<GbdtTriple, GbdtError> {
        let t = &self.triple;
        GbdtTriple::new(t.alpha.clone(), t.s0.clone(), t.lambda0.clone(), t.mode)
    }
}

fn parse_error(e: &serde_json::Error) -> IoError {
    IoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parse and validate problem text.
pub fn parse_problem_str(text: &str) -> Result<ProblemSpec, IoError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| parse_error(&e))?;
    if let Some(kind) = value.pointer("/potential/type").and_then(serde_json::Value::as_str) {
        if !GENERATORS.contains(&kind) {
            return Err(IoError::UnknownGenerator(kind.to_string()));
        }
    }
    let spec: ProblemSpec = serde_json::from_str(text).map_err(|e| parse_error(&e))?;
    spec.validate()?;
    Ok(spec)
}

pub fn parse_problem(path: &Path) -> Result<ProblemSpec, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_problem_str(&text)
}
