//! Serialized result records. Complex numbers are `[re, im]` pairs.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use sldkit_core::qfi::QfiDiagnostics;
use sldkit_core::ComplexMatrix;

use crate::cli::OutputFormat;
use crate::error::CliError;

pub type Point = BTreeMap<String, f64>;

pub fn complex_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    m.to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

#[derive(Debug, Serialize)]
pub struct SldRecord {
    pub theta: Point,
    pub parameter: String,
    #[serde(rename = "L")]
    pub l: Vec<Vec<[f64; 2]>>,
    pub gauge: &'static str,
    pub residual: f64,
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub support_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_rho_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sld_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_difference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    pub clamped: bool,
}

impl Diagnostics {
    pub fn new(support_rank: usize, d: &QfiDiagnostics, error_estimate: Option<f64>) -> Self {
        Self {
            support_rank,
            trace_rho_l: d.trace_rho_l,
            sld_residual: d.sld_residual,
            oracle_difference: d.oracle_difference,
            error_estimate,
            clamped: d.clamped,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct QfiRecord {
    pub theta: Point,
    pub parameter: String,
    #[serde(rename = "F")]
    pub f: f64,
    pub method: &'static str,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Serialize)]
pub struct QfiMatrixRecord {
    pub theta: Point,
    pub parameters: Vec<String>,
    #[serde(rename = "F")]
    pub f: Vec<Vec<f64>>,
    pub method: &'static str,
    pub psd: bool,
    pub min_eigenvalue: f64,
    pub asymmetry: f64,
}

#[derive(Debug, Serialize)]
pub struct RouteRecord {
    pub method: &'static str,
    pub exact: bool,
    /// `ok`, `skipped: <reason>` or `failed: <reason>`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qfi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct PairRecord {
    pub a: &'static str,
    pub b: &'static str,
    pub exact: bool,
    pub distance: f64,
    pub qfi_spread: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct XvalRecord {
    pub theta: Point,
    pub parameter: String,
    pub threshold: f64,
    pub routes: Vec<RouteRecord>,
    pub pairs: Vec<PairRecord>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct CrbRecord {
    pub parameter: String,
    pub theta_true: f64,
    pub shots: usize,
    pub trials: usize,
    pub seed: u64,
    pub mean_estimate: f64,
    pub empirical_variance: f64,
    pub qfi: f64,
    pub classical_fisher: f64,
    pub ratio: f64,
}

/// Writes each record as it is produced so long sweeps stream.
pub struct Emitter<W: Write> {
    out: W,
    format: OutputFormat,
}

impl<W: Write> Emitter<W> {
    pub fn new(out: W, format: OutputFormat) -> Self {
        Self { out, format }
    }

    pub fn emit<T: Serialize>(&mut self, record: &T) -> Result<(), CliError> {
        let text = match self.format {
            OutputFormat::Json => serde_json::to_string(record),
            OutputFormat::Pretty => serde_json::to_string_pretty(record),
        }
        .map_err(|e| CliError::solver(format!("serialization: {e}")))?;
        writeln!(self.out, "{text}")
            .and_then(|_| self.out.flush())
            .map_err(|e| CliError::input(format!("writing output: {e}")))
    }
}
