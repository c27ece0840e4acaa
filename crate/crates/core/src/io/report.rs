use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::{IoError, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Json,
    /// `steps.csv`, `intertwining.csv` and `nonstationary.csv` in a directory.
    CsvBundle,
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv-bundle" | "csv" => Ok(ReportFormat::CsvBundle),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

/// Floats with 17 significant digits in scientific notation; the layout is
/// otherwise that of `PrettyFormatter`.
struct ReportFormatter<'a>(PrettyFormatter<'a>);

fn fixed(v: f64) -> String {
    format!("{v:.16e}")
}

impl Formatter for ReportFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fixed(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Deterministic JSON rendering: struct field order, fixed float format.
pub fn render_json(report: &RunReport) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ReportFormatter(PrettyFormatter::new()));
    report.serialize(&mut ser).expect("report serialization is infallible");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_default()
}

/// Write `report` to `path`: a file for JSON, a directory for the CSV bundle.
pub fn emit_report(report: &RunReport, path: &Path, format: ReportFormat) -> Result<(), IoError> {
    match format {
        ReportFormat::Json => std::fs::write(path, render_json(report)).map_err(io_err(path)),
        ReportFormat::CsvBundle => {
            std::fs::create_dir_all(path).map_err(io_err(path))?;
            write_steps(report, &path.join("steps.csv"))?;
            write_intertwining(report, &path.join("intertwining.csv"))?;
            write_nonstationary(report, &path.join("nonstationary.csv"))
        }
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, IoError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

fn write_steps(report: &RunReport, path: &Path) -> Result<(), IoError> {
    let mut w = writer(path)?;
    w.write_record([
        "k",
        "identity_residual",
        "s_asymmetry",
        "s_positive_definite",
        "s_condition_estimate",
        "condition_warning",
        "involution_residual",
        "c_tilde_hermitian_residual",
        "inertia_defect",
        "bound",
        "pass",
    ])?;
    for row in report.steps.iter().flatten() {
        let d = &row.diagnostics;
        w.write_record([
            d.k.to_string(),
            fixed(d.identity_residual),
            fixed(d.s_asymmetry),
            d.s_positive_definite.map(|b| b.to_string()).unwrap_or_default(),
            fixed(d.s_condition_estimate),
            d.condition_warning.to_string(),
            opt(d.involution_residual),
            opt(d.c_tilde_hermitian_residual),
            opt(d.inertia_defect),
            fixed(d.bound),
            row.pass.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(path))
}

fn write_intertwining(report: &RunReport, path: &Path) -> Result<(), IoError> {
    let mut w = writer(path)?;
    w.write_record([
        "z_re",
        "z_im",
        "k",
        "intertwining_residual",
        "intertwining_bound",
        "transfer_inverse_residual",
        "transfer_inverse_bound",
        "conjugation_agreement",
        "conjugation_bound",
        "pass",
    ])?;
    let darboux = report.darboux.as_deref().unwrap_or_default();
    let conj = report.fundamental.as_deref().unwrap_or_default();
    let mut keys: Vec<([f64; 2], usize)> = darboux.iter().map(|r| (r.z, r.k)).collect();
    for r in conj {
        if !keys.contains(&(r.z, r.k)) {
            keys.push((r.z, r.k));
        }
    }
    for (z, k) in keys {
        let d = darboux.iter().find(|r| r.z == z && r.k == k);
        let c = conj.iter().find(|r| r.z == z && r.k == k);
        let pass = d.is_none_or(|r| r.pass) && c.is_none_or(|r| r.pass);
        w.write_record([
            fixed(z[0]),
            fixed(z[1]),
            k.to_string(),
            opt(d.and_then(|r| r.intertwining_residual)),
            opt(d.map(|r| r.intertwining_bound)),
            opt(d.map(|r| r.transfer_inverse_residual)),
            opt(d.map(|r| r.transfer_inverse_bound)),
            opt(c.map(|r| r.agreement)),
            opt(c.map(|r| r.bound)),
            pass.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(path))
}

fn write_nonstationary(report: &RunReport, path: &Path) -> Result<(), IoError> {
    let mut w = writer(path)?;
    w.write_record(["k", "t", "residual", "scale", "stationary_residual"])?;
    for r in report.nonstationary.iter().flat_map(|s| &s.rows) {
        w.write_record([
            r.k.to_string(),
            fixed(r.t),
            fixed(r.residual),
            fixed(r.scale),
            fixed(r.stationary_residual),
        ])?;
    }
    w.flush().map_err(io_err(path))
}
