// Golden-file harness shared by the golden and acceptance test targets.
//
// Each case runs the CLI in-process from the package directory and compares
// the printed report (and the `--out` file, if any) with tests/golden/.
// Regenerate with UPDATE_GOLDEN=1.

#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use cw11_cli::{run_from, RunReport};
use cw11_core::format::{parse, to_canonical};

pub const FIX: &str = "../../fixtures";
pub const OUT: &str = "../../target/cli-golden";

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
    /// Extension of the `--out` file, when the case writes one.
    pub out: Option<&'static str>,
}

macro_rules! case {
    ($name:expr, $exit:expr, $out:expr, [$($a:expr),* $(,)?]) => {
        Case { name: $name, args: &[$($a),*], exit: $exit, out: $out }
    };
}

pub const CASES: &[Case] = &[
    case!("validate-quadratic-1d", 0, None, ["validate", "--jet", "../../fixtures/quadratic_1d.json"]),
    case!("validate-quadratic-1d-m2", 0, None, ["validate", "--jet", "../../fixtures/quadratic_1d.json", "--M", "2"]),
    case!("validate-quadratic-1d-m-half", 1, None, ["validate", "--jet", "../../fixtures/quadratic_1d.json", "--M", "0.5"]),
    case!("validate-infeasible", 1, None, ["validate", "--jet", "../../fixtures/infeasible_1d.json"]),
    case!("validate-affine", 0, None, ["validate", "--jet", "../../fixtures/affine_1d.json"]),
    case!("validate-singleton", 0, None, ["validate", "--jet", "../../fixtures/singleton_1d.json"]),
    case!("validate-malformed", 2, None, ["validate", "--jet", "../../fixtures/malformed.json"]),
    case!("validate-missing", 2, None, ["validate", "--jet", "../../fixtures/does_not_exist.json"]),
    case!("extend-quadratic-half", 0, Some("json"), [
        "extend", "--jet", "../../fixtures/quadratic_1d.json",
        "--queries", "../../fixtures/queries_half.json",
        "--out", "../../target/cli-golden/extend-quadratic-half.json",
    ]),
    case!("extend-empty", 0, Some("json"), [
        "extend", "--jet", "../../fixtures/quadratic_1d.json",
        "--queries", "../../fixtures/queries_empty.json",
        "--out", "../../target/cli-golden/extend-empty.json",
    ]),
    case!("extend-singleton", 0, Some("json"), [
        "extend", "--jet", "../../fixtures/singleton_1d.json",
        "--queries", "../../fixtures/queries_one.json",
        "--out", "../../target/cli-golden/extend-singleton.json",
    ]),
    case!("extend-affine", 0, Some("json"), [
        "extend", "--jet", "../../fixtures/affine_1d.json",
        "--queries", "../../fixtures/queries_half.json", "--theta", "0",
        "--out", "../../target/cli-golden/extend-affine.json",
    ]),
    case!("extend-quadratic-2d", 0, Some("json"), [
        "extend", "--jet", "../../fixtures/quadratic_2d.json",
        "--queries", "../../fixtures/queries_2d.json", "--order", "canonical",
        "--out", "../../target/cli-golden/extend-quadratic-2d.json",
    ]),
    case!("extend-grid-1d", 0, Some("csv"), [
        "extend", "--jet", "../../fixtures/quadratic_1d.json", "--grid", "0", "1", "5",
        "--out", "../../target/cli-golden/extend-grid-1d.csv",
    ]),
    case!("extend-grid-2d", 0, Some("csv"), [
        "extend", "--jet", "../../fixtures/quadratic_2d.json", "--grid", "-1", "1", "3",
        "--out", "../../target/cli-golden/extend-grid-2d.csv",
    ]),
    case!("extend-infeasible", 1, None, [
        "extend", "--jet", "../../fixtures/infeasible_1d.json",
        "--queries", "../../fixtures/queries_half.json",
    ]),
    case!("extend-dimension-mismatch", 2, None, [
        "extend", "--jet", "../../fixtures/quadratic_1d.json",
        "--queries", "../../fixtures/queries_2d.json",
    ]),
    case!("body-circle64", 0, None, ["body-check", "--body", "../../fixtures/circle64.json"]),
    case!("body-antipodal", 1, None, ["body-check", "--body", "../../fixtures/antipodal.json"]),
    case!("body-single-point", 0, None, ["body-check", "--body", "../../fixtures/single_point_body.json"]),
    case!("cex-tangent-k2-r2", 0, None, ["cex", "tangent", "--k", "2", "--r", "2"]),
    case!("cex-tangent-k20-r3", 0, None, ["cex", "tangent", "--k", "20", "--r", "3", "--terms", "60"]),
    case!("cex-scan", 0, None, ["cex", "scan", "--dim", "20", "--samples", "2000", "--seed", "7"]),
    case!("cex-sweep-r3", 0, Some("csv"), [
        "cex", "sweep", "--r", "3", "--ks", "10,20,40",
        "--out", "../../target/cli-golden/cex-sweep-r3.csv",
    ]),
    case!("cex-sweep-r2", 2, None, ["cex", "sweep", "--r", "2", "--ks", "10"]),
];

pub fn golden_dir() -> PathBuf {
    PathBuf::from("tests/golden")
}

pub fn run_case(case: &Case) -> Result<(RunReport, String), String> {
    fs::create_dir_all(OUT).map_err(|e| e.to_string())?;
    let mut argv = vec!["cw11"];
    argv.extend_from_slice(case.args);
    let outcome = run_from(argv).map_err(|e| format!("{}: usage error {e}", case.name))?;
    Ok((outcome.report, outcome.text))
}

fn compare(path: &PathBuf, actual: &str, update: bool) -> Result<(), String> {
    if update {
        fs::write(path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected != actual {
        return Err(format!("{} differs from the golden file", path.display()));
    }
    Ok(())
}

/// Runs one case and checks exit status, golden report, golden data file and
/// the report's lossless round trip.
pub fn check_case(case: &Case) -> Result<RunReport, String> {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let (report, text) = run_case(case)?;
    if report.exit_status != case.exit {
        return Err(format!(
            "{}: exit {} (expected {}), error {:?}",
            case.name, report.exit_status, case.exit, report.error
        ));
    }
    compare(&golden_dir().join(format!("{}.report.json", case.name)), &text, update)?;
    if let Some(ext) = case.out {
        let written = fs::read_to_string(format!("{OUT}/{}.{ext}", case.name))
            .map_err(|e| format!("{}: output file: {e}", case.name))?;
        compare(&golden_dir().join(format!("{}.out.{ext}", case.name)), &written, update)?;
    }
    let back: RunReport = parse(&text).map_err(|e| format!("{}: {e}", case.name))?;
    if back != report || to_canonical(&back).unwrap() != text {
        return Err(format!("{}: report does not round-trip", case.name));
    }
    Ok(report)
}

pub fn fixture(name: &str) -> String {
    format!("{FIX}/{name}")
}
