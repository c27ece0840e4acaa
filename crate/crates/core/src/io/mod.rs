//! Problem files, the staged pipeline, and report emission.

mod pipeline;
mod problem;
mod report;

pub use pipeline::{
    auto_z_grid, run_pipeline, ConjugationRow, DarbouxRow, ExitStatus, FactorRow, FactorizationSection,
    FiniteDifferenceSummary, NonstationarySection, RunReport, Stage, StageFailure, StageTiming, TimeIndependenceRow,
    Verdict,
};
pub use problem::{
    parse_problem, parse_problem_str, GridSpec, Overrides, PotentialSpec, ProblemSpec, RunSpec, TGridSpec,
    TripleSpec,
};
pub use report::{emit_report, render_json, ReportFormat};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("dimension mismatch in {field}: {detail}")]
    DimensionMismatch { field: String, detail: String },
    #[error("unknown potential generator {0:?} (expected constant-j, unitary-list, random-unitary or explicit-c-list)")]
    UnknownGenerator(String),
    #[error("invalid value for {field}: {detail}")]
    Invalid { field: String, detail: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl IoError {
    fn invalid(field: impl Into<String>, detail: impl Into<String>) -> Self {
        IoError::Invalid {
            field: field.into(),
            detail: detail.into(),
        }
    }

    fn dimension(field: impl Into<String>, detail: impl Into<String>) -> Self {
        IoError::DimensionMismatch {
            field: field.into(),
            detail: detail.into(),
        }
    }
}
