//! The JSON report every command prints.

use cw11_core::cex::{CexReport, ScanReport};
use cw11_core::{BodyReport, CwReport, ExtensionStep, Tolerances};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    /// Arguments after the program name, as given.
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Option<Outputs>,
    pub tolerances: Tolerances,
    /// Value of the command's `--tol` in effect, when it has one.
    pub tol: Option<f64>,
    pub warnings: Vec<String>,
    pub exit_status: i32,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outputs {
    Validate(ValidateOutput),
    Extend(ExtendOutput),
    BodyCheck(BodyReport),
    CexTangent(CexReport),
    CexScan(ScanReport),
    CexSweep(SweepOutput),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateOutput {
    pub dim: usize,
    pub points: usize,
    pub report: CwReport,
    /// The `--M` being tested, if any.
    pub m: Option<f64>,
    /// `cw11_gap` at `m`; absent without `--M` or with a single point.
    pub gap_at_m: Option<f64>,
    pub feasible: bool,
}

/// Where the extension constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantSource {
    Flag,
    Minimal,
    /// Constant-gradient data: any positive constant works, 1 is used.
    AffineDefault,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    pub s: f64,
    pub i: f64,
    pub lambda0: f64,
    pub theta: f64,
    pub echoed: Option<usize>,
    pub active: usize,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl From<&ExtensionStep> for StepRecord {
    fn from(s: &ExtensionStep) -> Self {
        StepRecord {
            x: s.x.iter().copied().collect(),
            f: s.fx,
            g: s.gx.iter().copied().collect(),
            s: s.s,
            i: s.i,
            lambda0: s.lambda0,
            theta: s.theta,
            echoed: s.echoed,
            active: s.active,
            residual: s.residual,
            warnings: s.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendOutput {
    pub m: f64,
    pub m_source: ConstantSource,
    pub theta: f64,
    pub order: String,
    pub queries: usize,
    pub added: usize,
    pub points_out: usize,
    /// `cw11_gap` of the re-parsed output jet; absent for a single point.
    pub final_gap: Option<f64>,
    pub steps: Vec<StepRecord>,
    pub written: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOutput {
    pub r: f64,
    pub terms: usize,
    pub rows: Vec<SweepRow>,
    pub above_bound: bool,
    pub increasing: bool,
    pub written: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub k: usize,
    pub tangent: f64,
    pub bound: f64,
    pub closed_form: f64,
}
