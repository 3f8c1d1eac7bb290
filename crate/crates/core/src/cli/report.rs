use std::io::{self, Write};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// A failure the suite exists to exhibit; counts as success.
    ExpectedFail,
    Error,
}

impl Status {
    pub fn ok(self) -> bool {
        matches!(self, Status::Pass | Status::ExpectedFail)
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "OK",
            Status::Fail => "FAIL",
            Status::ExpectedFail => "EXPECTED-FAIL",
            Status::Error => "ERROR",
        }
    }
}

/// Where a residual was observed, with the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub label: String,
    pub point_index: usize,
    pub point: Vec<f64>,
    pub inputs: Vec<String>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub status: Status,
    pub tolerance: f64,
    pub max_residual: Option<f64>,
    pub witnesses: Vec<Witness>,
    pub error: Option<String>,
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub model: String,
    pub dim: usize,
    pub seed: u64,
    pub sample_seed: u64,
    pub jet_order: usize,
    pub points: usize,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
    /// SHA-256 of the report with this field and `wall_time_seconds` removed.
    pub determinism_hash: String,
    pub wall_time_seconds: f64,
}

impl Report {
    pub fn compute_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("determinism_hash");
            map.remove("wall_time_seconds");
        }
        let bytes = serde_json::to_vec(&v).expect("value serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|c| format!("{c:.4}")).collect();
    format!("({})", parts.join(", "))
}

/// Writes the summary table. Rows are ordered by suite name, then by
/// witness point index. Witness rows appear for non-passing suites, and
/// for every suite when `verbose` is set.
pub fn write_report(report: &Report, out: &mut impl Write, verbose: bool) -> io::Result<()> {
    writeln!(out, "{:<24} {:<14} {:>12} {:>10}  witness", "suite", "status", "max_residual", "tolerance")?;
    let mut suites: Vec<&SuiteResult> = report.suites.iter().collect();
    suites.sort_by(|a, b| a.name.cmp(&b.name));
    for s in suites {
        let residual = s.max_residual.map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"));
        let mut witnesses: Vec<&Witness> = s.witnesses.iter().collect();
        witnesses.sort_by_key(|w| w.point_index);
        let first = if s.status == Status::Pass && !verbose {
            String::new()
        } else {
            witnesses
                .first()
                .map(|w| format!("#{} {}", w.point_index, fmt_point(&w.point)))
                .unwrap_or_default()
        };
        writeln!(
            out,
            "{:<24} {:<14} {:>12} {:>10.1e}  {}",
            s.name,
            s.status.label(),
            residual,
            s.tolerance,
            first
        )?;
        if let Some(e) = &s.error {
            writeln!(out, "    error: {e}")?;
        }
        if verbose {
            for w in &witnesses {
                writeln!(out, "    {} at #{} {}: {:.3e}", w.label, w.point_index, fmt_point(&w.point), w.residual)?;
                for input in &w.inputs {
                    writeln!(out, "      {input}")?;
                }
            }
        }
    }
    Ok(())
}

pub fn print_report(report: &Report, verbose: bool) {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    let _ = write_report(report, &mut lock, verbose);
}
