use std::fs;
use std::path::Path;

use cw11_core::cex::{ball_bound_scan, mc_divergence_sweep, tangent_value, CexConfig};
use cw11_core::format::{jet_to_string, parse_body, parse_jet, parse_queries, to_canonical};
use cw11_core::tolerance::{EXTEND_REL, FEAS_REL};
use cw11_core::{
    check_body, cw11_gap, extend_many, minimal_cw11_constant, ErrorClass, Point, QueryOrder,
    Tolerances,
};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::args::*;
use crate::report::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;

/// Default relative agreement of the two tangent evaluation paths.
const CEX_PATH_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input {
        path: String,
        source: cw11_core::Error,
    },
    #[error(transparent)]
    Core(#[from] cw11_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Certificate(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        let class = |e: &cw11_core::Error| match e.class() {
            ErrorClass::Malformed => EXIT_MALFORMED,
            ErrorClass::Infeasible => EXIT_INFEASIBLE,
            ErrorClass::Certificate => EXIT_CERTIFICATE,
        };
        match self {
            Failure::Io { .. } | Failure::Usage(_) => EXIT_MALFORMED,
            Failure::Input { source, .. } => class(source),
            Failure::Core(e) => class(e),
            Failure::Infeasible(_) => EXIT_INFEASIBLE,
            Failure::Certificate(_) => EXIT_CERTIFICATE,
        }
    }
}

/// Result of one invocation: the report and its canonical JSON text.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub text: String,
}

#[derive(Default)]
struct Context {
    inputs: Vec<InputDigest>,
    warnings: Vec<String>,
    tol: Option<f64>,
    /// Where to copy the report, for commands whose data product is the report.
    report_out: Option<String>,
}

impl Context {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let name = path.display().to_string();
        let bytes = fs::read(path).map_err(|source| Failure::Io {
            path: name.clone(),
            source,
        })?;
        self.inputs.push(InputDigest {
            path: name.clone(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|e| Failure::Usage(format!("{name}: not UTF-8 ({e})")))
    }
}

fn write(path: &Path, text: &str) -> Result<String, Failure> {
    let name = path.display().to_string();
    fs::write(path, text).map_err(|source| Failure::Io {
        path: name.clone(),
        source,
    })?;
    Ok(name)
}

fn input_error(path: &Path) -> impl FnOnce(cw11_core::Error) -> Failure + '_ {
    move |source| Failure::Input {
        path: path.display().to_string(),
        source,
    }
}

fn positive_constant(m: f64) -> Result<f64, Failure> {
    if m > 0.0 && m.is_finite() {
        Ok(m)
    } else {
        Err(Failure::Usage(format!("--M must be positive and finite, got {m}")))
    }
}

/// Runs a parsed command line. `argv` excludes the program name.
pub fn execute(cli: Cli, argv: Vec<String>) -> Outcome {
    let mut ctx = Context::default();
    let result = match cli.command {
        Command::Validate(a) => validate(a, &mut ctx),
        Command::Extend(a) => extend(a, &mut ctx),
        Command::BodyCheck(a) => body_check(a, &mut ctx),
        Command::Cex { which } => match which {
            CexCommand::Tangent(a) => cex_tangent(a, &mut ctx),
            CexCommand::Scan(a) => cex_scan(a, &mut ctx),
            CexCommand::Sweep(a) => cex_sweep(a, &mut ctx),
        },
    };
    let (outputs, exit_status, error) = match result {
        Ok((out, code)) => (Some(out), code, None),
        Err(e) => (None, e.exit_code(), Some(e.to_string())),
    };
    let mut report = RunReport {
        command: argv,
        inputs: ctx.inputs,
        outputs,
        tolerances: Tolerances::default(),
        tol: ctx.tol,
        warnings: ctx.warnings,
        exit_status,
        error,
    };
    let mut text = to_canonical(&report).expect("reports serialize");
    if let Some(path) = ctx.report_out {
        if let Err(e) = fs::write(&path, &text) {
            report.outputs = None;
            report.exit_status = EXIT_MALFORMED;
            report.error = Some(format!("{path}: {e}"));
            text = to_canonical(&report).expect("reports serialize");
        }
    }
    Outcome { report, text }
}

fn validate(a: ValidateArgs, ctx: &mut Context) -> Result<(Outputs, i32), Failure> {
    let text = ctx.read(&a.jet)?;
    let jet = parse_jet(&text).map_err(input_error(&a.jet))?;
    let report = minimal_cw11_constant(&jet)?;
    let m = a.m.map(positive_constant).transpose()?;
    let tol = a.tol.unwrap_or(FEAS_REL);
    ctx.tol = Some(tol);
    ctx.report_out = a.out.map(|p| p.display().to_string());

    let gap_at_m = match m {
        Some(m) if jet.len() >= 2 => Some(cw11_gap(&jet, m)?),
        _ => None,
    };
    let within = gap_at_m.is_none_or(|g| g >= -tol * (1.0 + jet.value_scale()));
    if !report.feasible {
        let pair = report.worst_pair.map(|(x, y)| format!(" (pair {x}, {y})")).unwrap_or_default();
        ctx.warnings.push(format!("subgradient inequality fails{pair}: no constant works"));
    } else if report.minimal_m == 0.0 {
        ctx.warnings.push("constant-gradient data: any M > 0 is admissible".into());
    }
    if let (Some(m), false) = (m, within) {
        ctx.warnings.push(format!("gap at M = {m} is below -tol"));
    }
    let feasible = report.feasible && within;
    let out = ValidateOutput {
        dim: jet.dim(),
        points: jet.len(),
        report,
        m,
        gap_at_m,
        feasible,
    };
    Ok((Outputs::Validate(out), if feasible { EXIT_OK } else { EXIT_INFEASIBLE }))
}

/// `n` nodes per axis on `[lo, hi]^dim`, in lexicographic order.
fn grid_points(spec: &[String], dim: usize) -> Result<Vec<Point>, Failure> {
    let bad = || Failure::Usage(format!("--grid expects LO HI N, got {spec:?}"));
    let [lo, hi, n] = spec else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(bad());
    }
    if dim > 2 {
        return Err(Failure::Usage(format!("grid mode needs dimension <= 2, jet has {dim}")));
    }
    let node = |i: usize| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    Ok(match dim {
        1 => (0..n).map(|i| Point::from_element(1, node(i))).collect(),
        _ => (0..n)
            .flat_map(|i| (0..n).map(move |j| Point::from_vec(vec![node(i), node(j)])))
            .collect(),
    })
}

fn csv_rows(dim: usize, steps: &[StepRecord]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x_{i}")).collect();
    header.push("f".into());
    header.extend((1..=dim).map(|i| format!("g_{i}")));
    w.write_record(&header).map_err(csv_error)?;
    for s in steps {
        let mut row: Vec<String> = s.x.iter().map(f64::to_string).collect();
        row.push(s.f.to_string());
        row.extend(s.g.iter().map(f64::to_string));
        w.write_record(&row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of numbers is UTF-8"))
}

fn csv_error(e: csv::Error) -> Failure {
    Failure::Usage(format!("csv: {e}"))
}

fn extend(a: ExtendArgs, ctx: &mut Context) -> Result<(Outputs, i32), Failure> {
    let text = ctx.read(&a.jet)?;
    let jet = parse_jet(&text).map_err(input_error(&a.jet))?;
    let (queries, order, grid_mode) = match (&a.queries, &a.grid) {
        (Some(path), _) => {
            let qtext = ctx.read(path)?;
            let (dim, q) = parse_queries(&qtext).map_err(input_error(path))?;
            if dim != jet.dim() {
                return Err(Failure::Usage(format!(
                    "{}: dimension {dim} differs from the jet's {}",
                    path.display(),
                    jet.dim()
                )));
            }
            (q, a.order.into(), false)
        }
        (None, Some(spec)) => (grid_points(spec, jet.dim())?, QueryOrder::Canonical, true),
        (None, None) => return Err(Failure::Usage("need --queries or --grid".into())),
    };
    if !(0.0..=1.0).contains(&a.theta) {
        return Err(Failure::Usage(format!("--theta must lie in [0, 1], got {}", a.theta)));
    }
    let tol = a.tol.unwrap_or(EXTEND_REL);
    ctx.tol = Some(tol);

    let cw = minimal_cw11_constant(&jet)?;
    let (m, m_source) = match a.m {
        Some(m) => (positive_constant(m)?, ConstantSource::Flag),
        None => match cw.default_constant() {
            Some(m) if cw.minimal_m > 0.0 => (m, ConstantSource::Minimal),
            Some(m) => (m, ConstantSource::AffineDefault),
            None => {
                return Err(Failure::Infeasible(format!(
                    "jet is not (CW11) for any constant (pair {:?})",
                    cw.worst_pair
                )))
            }
        },
    };

    let trace = extend_many(&jet, m, &queries, a.theta, order)?;
    let steps: Vec<StepRecord> = trace.steps.iter().map(StepRecord::from).collect();
    for (i, s) in steps.iter().enumerate() {
        ctx.warnings.extend(s.warnings.iter().map(|w| format!("step {i}: {w}")));
    }

    // the written document must parse back to the same jet and still pass
    let out_text = jet_to_string(&trace.jet)?;
    let back = parse_jet(&out_text)?;
    if back != trace.jet {
        return Err(Failure::Certificate("output jet does not survive a round trip".into()));
    }
    let final_gap = if back.len() >= 2 { Some(cw11_gap(&back, m)?) } else { None };
    if let Some(g) = final_gap {
        if g < -tol * (1.0 + back.value_scale()) {
            return Err(Failure::Certificate(format!(
                "output jet fails re-validation at M = {m}: gap {g:e}"
            )));
        }
    }

    let format = a.format.unwrap_or(if grid_mode { Format::Csv } else { Format::Json });
    let written = match &a.out {
        Some(path) => Some(write(
            path,
            &match format {
                Format::Json => out_text,
                Format::Csv => csv_rows(jet.dim(), &steps)?,
            },
        )?),
        None => None,
    };
    let out = ExtendOutput {
        m,
        m_source,
        theta: a.theta,
        order: match order {
            QueryOrder::Given => "given".into(),
            QueryOrder::Canonical => "canonical".into(),
        },
        queries: queries.len(),
        added: trace.jet.len() - jet.len(),
        points_out: trace.jet.len(),
        final_gap,
        steps,
        written,
    };
    Ok((Outputs::Extend(out), EXIT_OK))
}

fn body_check(a: BodyArgs, ctx: &mut Context) -> Result<(Outputs, i32), Failure> {
    let text = ctx.read(&a.body)?;
    let body = parse_body(&text).map_err(input_error(&a.body))?;
    ctx.report_out = a.out.map(|p| p.display().to_string());
    let report = check_body(&body)?;
    let code = if report.feasible { EXIT_OK } else { EXIT_INFEASIBLE };
    Ok((Outputs::BodyCheck(report), code))
}

fn cex_tangent(a: TangentArgs, ctx: &mut Context) -> Result<(Outputs, i32), Failure> {
    let tol = a.tol.unwrap_or(CEX_PATH_TOL);
    ctx.tol = Some(tol);
    ctx.report_out = a.out.map(|p| p.display().to_string());
    let terms = a.terms.unwrap_or(2 * a.k + 20);
    let report = tangent_value(&CexConfig::new(terms, a.r, a.k))?;
    ctx.warnings.extend(report.warnings.iter().cloned());
    let ok = report.tangent_direct >= report.lower_bound && report.paths_agree(tol);
    Ok((Outputs::CexTangent(report), if ok { EXIT_OK } else { EXIT_CERTIFICATE }))
}

fn cex_scan(a: ScanArgs, ctx: &mut Context) -> Result<(Outputs, i32), Failure> {
    ctx.report_out = a.out.map(|p| p.display().to_string());
    let scan = ball_bound_scan(a.dim, a.terms.unwrap_or(a.dim), a.samples, a.seed)?;
    let code = if scan.within_bound { EXIT_OK } else { EXIT_CERTIFICATE };
    Ok((Outputs::CexScan(scan), code))
}

fn cex_sweep(a: SweepArgs, ctx: &mut Context) -> Result<(Outputs, i32), Failure> {
    let tol = a.tol.unwrap_or(CEX_PATH_TOL);
    ctx.tol = Some(tol);
    let reports = mc_divergence_sweep(a.r, &a.ks, a.terms)?;
    for rep in &reports {
        ctx.warnings
            .extend(rep.warnings.iter().map(|w| format!("k = {}: {w}", rep.config.k)));
    }
    let rows: Vec<SweepRow> = reports
        .iter()
        .map(|rep| SweepRow {
            k: rep.config.k,
            tangent: rep.tangent_direct,
            bound: rep.lower_bound,
            closed_form: rep.tangent_closed_form,
        })
        .collect();
    let above_bound = rows.iter().all(|r| r.tangent >= r.bound);
    let increasing = rows
        .windows(2)
        .all(|w| w[1].k <= w[0].k || w[1].tangent > w[0].tangent);
    let agree = reports.iter().all(|rep| rep.paths_agree(tol));

    let written = match &a.out {
        Some(path) => {
            let text = match a.format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["k", "tangent", "bound"]).map_err(csv_error)?;
                    for r in &rows {
                        w.write_record([r.k.to_string(), r.tangent.to_string(), r.bound.to_string()])
                            .map_err(csv_error)?;
                    }
                    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
                    String::from_utf8(bytes).expect("csv of numbers is UTF-8")
                }
                Format::Json => to_canonical(&rows)?,
            };
            Some(write(path, &text)?)
        }
        None => None,
    };
    let ok = above_bound && increasing && agree;
    let out = SweepOutput {
        r: a.r,
        terms: a.terms,
        rows,
        above_bound,
        increasing,
        written,
    };
    Ok((Outputs::CexSweep(out), if ok { EXIT_OK } else { EXIT_CERTIFICATE }))
}
