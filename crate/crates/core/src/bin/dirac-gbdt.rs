use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dirac_gbdt::io::{emit_report, parse_problem, render_json, run_pipeline, Overrides, ReportFormat, RunReport, Stage};

#[derive(Parser)]
#[command(name = "dirac-gbdt", version, about = "GBDT of discrete skew-selfadjoint Dirac systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem file (JSON).
    #[arg(long, global = true)]
    problem: Option<PathBuf>,

    /// Report destination: a file for json, a directory for csv-bundle.
    /// JSON goes to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "json")]
    format: ReportFormat,

    /// Override run.steps.
    #[arg(long, global = true)]
    steps: Option<usize>,

    /// Override the seed of a random-unitary potential.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long = "tolerance-rel", global = true)]
    tolerance_rel: Option<f64>,

    #[arg(long = "tolerance-abs", global = true)]
    tolerance_abs: Option<f64>,

    /// Leave wall-clock timings out of the report so reruns are byte-identical.
    #[arg(long, global = true)]
    omit_timings: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the potential and the admissibility of the triple.
    Validate,
    /// Run the recursions and record per-step diagnostics.
    Iterate,
    /// Intertwining and transfer-inverse residuals on the z-grid.
    Darboux,
    /// Direct versus Darboux-conjugated transformed fundamental solutions.
    Fundamental,
    /// Unitary factors of the transformed potential.
    Factorize,
    /// Residuals of the explicit non-stationary solution.
    Nonstationary,
    /// Every stage.
    Run,
}

impl Command {
    fn stages(self) -> Vec<Stage> {
        match self {
            Command::Validate => vec![Stage::Validate],
            Command::Iterate => vec![Stage::Iterate],
            Command::Darboux => vec![Stage::Darboux],
            Command::Fundamental => vec![Stage::Fundamental],
            Command::Factorize => vec![Stage::Factorize],
            Command::Nonstationary => vec![Stage::Nonstationary],
            Command::Run => Stage::ALL.to_vec(),
        }
    }
}

fn report_for(cli: &Cli) -> RunReport {
    let Some(path) = &cli.problem else {
        return RunReport::spec_error(&"--problem <path> is required");
    };
    let overrides = Overrides {
        steps: cli.steps,
        seed: cli.seed,
        rel: cli.tolerance_rel,
        abs: cli.tolerance_abs,
    };
    match parse_problem(path).and_then(|spec| spec.apply_overrides(&overrides)) {
        Ok(spec) => run_pipeline(&spec, &cli.command.stages(), !cli.omit_timings),
        Err(e) => RunReport::spec_error(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = report_for(&cli);
    if let Some(failure) = &report.failure {
        eprintln!("dirac-gbdt: {} stage failed ({}): {}", failure.stage, failure.kind, failure.error);
    }
    let written = match (&cli.out, cli.format) {
        (Some(path), format) => emit_report(&report, path, format).map_err(|e| e.to_string()),
        (None, ReportFormat::Json) => {
            print!("{}", render_json(&report));
            Ok(())
        }
        (None, ReportFormat::CsvBundle) => Err("--format csv-bundle requires --out <directory>".into()),
    };
    if let Err(e) = written {
        eprintln!("dirac-gbdt: {e}");
        return ExitCode::from(3);
    }
    ExitCode::from(report.exit_status().code() as u8)
}
