//! Numerical tolerances shared by every module.
//!
//! Every threshold is relative: it is multiplied by `1 + scale`, where the
//! scale is the magnitude of the quantities being compared.

use serde::{Deserialize, Serialize};

/// Minimal separation between jet points, relative to `1 + max |coordinate|`.
pub const DEDUP_REL: f64 = 1e-12;
/// Threshold for `D(x, y) = 0` when classifying the minimal constant.
pub const ABS_REL: f64 = 1e-12;
/// Threshold for `G(x) = G(y)`, relative to `1 + max ||G||`.
pub const GRAD_REL: f64 = 1e-12;
/// Admissible negative pair gap before a jet is declared not (CW11) at a given M.
pub const FEAS_REL: f64 = 1e-9;
/// Ratio window defining the active set of the minimax, relative to `1 + lambda0`.
pub const ACT_REL: f64 = 1e-7;
/// Radius below which a ball is treated as a singleton.
pub const R_ZERO_REL: f64 = 1e-12;
/// `lambda0` in `(1, 1 + LAMBDA_SLACK]` is accepted with a warning.
pub const LAMBDA_SLACK: f64 = 1e-6;
/// Default stationarity tolerance for the minimax certificate.
pub const KKT_TOL: f64 = 1e-9;
/// Admissible bracket inversion `s - I`, relative to `1 + |s| + |I|`.
pub const BRACKET_REL: f64 = 1e-9;
/// Admissible final-jet gap after an extension, relative to the jet value scale.
pub const EXTEND_REL: f64 = 1e-8;
/// Deviation of `||N(y)||` from one accepted for body normals.
pub const UNIT_NORMAL: f64 = 1e-12;

/// Snapshot of the tolerance set, carried in reports so reruns are comparable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub dedup_rel: f64,
    pub abs_rel: f64,
    pub grad_rel: f64,
    pub feas_rel: f64,
    pub act_rel: f64,
    pub r_zero_rel: f64,
    pub lambda_slack: f64,
    pub kkt_tol: f64,
    pub bracket_rel: f64,
    pub extend_rel: f64,
    pub unit_normal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dedup_rel: DEDUP_REL,
            abs_rel: ABS_REL,
            grad_rel: GRAD_REL,
            feas_rel: FEAS_REL,
            act_rel: ACT_REL,
            r_zero_rel: R_ZERO_REL,
            lambda_slack: LAMBDA_SLACK,
            kkt_tol: KKT_TOL,
            bracket_rel: BRACKET_REL,
            extend_rel: EXTEND_REL,
            unit_normal: UNIT_NORMAL,
        }
    }
}
