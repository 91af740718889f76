// Acceptance run: one PASS/FAIL line per criterion, then a nonzero exit if
// any failed. Built without the libtest harness so the lines always print.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use cw11_cli::report::Outputs;
use cw11_cli::{run_from, EXIT_OK};
use cw11_core::cex::{ball_bound_scan, strong_convexity_witness, tangent_value, CexConfig};
use cw11_core::format::{jet_to_string, parse, parse_body, parse_jet, to_canonical, BodyFile, QueriesFile};
use cw11_core::sample::{distinct_points, random_feasible_jet, uniform_in_ball, ConvexFn, Quadratic};
use cw11_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn feasible_instance(rng: &mut ChaCha8Rng, dim: usize) -> (Jet, f64) {
    let n = rng.random_range(2..=12);
    let jet = random_feasible_jet(rng, dim, n);
    let m = minimal_cw11_constant(&jet).unwrap().default_constant().unwrap();
    (jet, m)
}

fn fresh_query(rng: &mut ChaCha8Rng, jet: &Jet) -> Point {
    loop {
        let x = uniform_in_ball(rng, jet.dim(), 2.0);
        if jet.entries().iter().all(|e| (&e.x - &x).norm() > 1e-3) {
            return x;
        }
    }
}

fn quadratic_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let q = Quadratic::half_norm_squared(5);
    let jet = q.sample_jet(distinct_points(&mut rng, 5, 20, 1.0, 1e-3)).unwrap();
    let rep = minimal_cw11_constant(&jet).unwrap();
    let queries: Vec<Point> = (0..10).map(|_| fresh_query(&mut rng, &jet)).collect();
    let trace = extension::extend_many(&jet, 1.0, &queries, 0.5, QueryOrder::Given).unwrap();
    let gap = cw11_gap(&trace.jet, 1.0).unwrap();
    let one_d = Jet::from_scalars(&[(0.0, 0.0, 0.0), (1.0, 0.5, 1.0)]).unwrap();
    let step = extend_point(&one_d, 1.0, &Point::from_element(1, 0.5), 0.5).unwrap();
    let elapsed = start.elapsed();
    let pass = (rep.minimal_m - 1.0).abs() <= 1e-9
        && (rep.gamma - 1.0).abs() <= 1e-9
        && gap >= -1e-8
        && (step.fx - 0.125).abs() <= 1e-12
        && (step.gx[0] - 0.5).abs() <= 1e-12
        && elapsed < Duration::from_secs(1);
    verdict(
        pass,
        format!(
            "minimal_M={} gamma={} final gap={gap:e} 1D (f,G)=({}, {}) in {elapsed:.2?}",
            rep.minimal_m, rep.gamma, step.fx, step.gx[0]
        ),
    )
}

fn membership_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let (mut inside, mut outside, mut boundary, mut violations) = (0, 0, 0, 0);
    for _ in 0..1000 {
        let (jet, m) = feasible_instance(&mut rng, 3);
        let x = fresh_query(&mut rng, &jet);
        let balls = pair_balls(&jet, m, &x).unwrap();
        let z0 = solve_minimax(&balls, 1e-9).unwrap().z0;
        let rmax = balls.iter().fold(0.0_f64, |a, b| a.max(b.radius));
        for _ in 0..4 {
            let spread = rmax * rng.random_range(0.0..1.5);
            let z = &z0 + uniform_in_ball(&mut rng, 3, spread);
            let margin = membership_margin(&balls, &z).unwrap();
            let (s, i) = bracket(&jet, m, &x, &z).unwrap();
            let scale = (1.0 + rmax * rmax).max(m * (1.0 + jet.value_scale()));
            if (margin - m * (s - i)).abs() > 1e-9 * scale {
                violations += 1;
            }
            if margin.abs() <= 1e-9 * scale {
                boundary += 1;
            } else if (margin <= 0.0) != (s <= i) {
                violations += 1;
            } else if margin <= 0.0 {
                inside += 1;
            } else {
                outside += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && inside > 0 && outside > 0 && elapsed < Duration::from_secs(10);
    verdict(
        pass,
        format!(
            "{violations} violations ({inside} inside, {outside} outside, {boundary} on the boundary band) in {elapsed:.2?}"
        ),
    )
}

fn minimax_certificate() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let dims = [1, 2, 3, 5];
    let (mut failures, mut worst_lambda, mut worst_margin, mut worst_residual) = (0, 0.0_f64, f64::MIN, 0.0_f64);
    for trial in 0..500 {
        let (jet, m) = feasible_instance(&mut rng, dims[trial % dims.len()]);
        let x = fresh_query(&mut rng, &jet);
        let balls = pair_balls(&jet, m, &x).unwrap();
        let res = solve_minimax(&balls, 1e-9).unwrap();
        let margin = membership_margin(&balls, &res.z0).unwrap();
        let total: f64 = res.weights.iter().sum();
        let simplex = res.weights.iter().all(|&w| w >= 0.0) && (total - 1.0).abs() <= 1e-12;
        worst_lambda = worst_lambda.max(res.lambda0);
        worst_margin = worst_margin.max(margin);
        worst_residual = worst_residual.max(res.residual);
        if !(res.lambda0 <= 1.0 + 1e-8 && margin <= 1e-9 && res.residual <= 1e-7 && simplex) {
            failures += 1;
        }
    }
    verdict(
        failures == 0,
        format!(
            "{failures} failures; max lambda0={worst_lambda} max margin={worst_margin:e} max residual={worst_residual:e}"
        ),
    )
}

fn quadratic_necessity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let (mut failures, mut worst) = (0, f64::INFINITY);
    for _ in 0..200 {
        let dim = rng.random_range(1..=6);
        let rank = rng.random_range(1..=dim);
        let q = Quadratic::random(&mut rng, dim, rank);
        let n = rng.random_range(2..=15);
        let jet = q.sample_jet(distinct_points(&mut rng, dim, n, 1.5, 1e-3)).unwrap();
        let gap = cw11_gap(&jet, q.lambda_max()).unwrap();
        worst = worst.min(gap);
        if gap < -1e-9 {
            failures += 1;
        }
    }
    verdict(failures == 0, format!("{failures} failures; smallest gap={worst:e}"))
}

fn phi_nonnegative() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let dims = [1, 2, 3, 5];
    let (mut failures, mut worst, mut evaluated) = (0usize, f64::INFINITY, 0usize);
    for trial in 0..200 {
        let (jet, m) = feasible_instance(&mut rng, dims[trial % dims.len()]);
        let x = fresh_query(&mut rng, &jet);
        let balls = pair_balls(&jet, m, &x).unwrap();
        let gammas = gamma_pairs(&jet, m, &x).unwrap();
        let n = jet.len();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = phi_diagnostic(&balls, &gammas, (a, b), (c, d)).unwrap();
                        evaluated += 1;
                        worst = worst.min(v);
                        if v < -1e-9 {
                            failures += 1;
                        }
                    }
                }
            }
        }
    }
    verdict(
        failures == 0,
        format!("{failures} negative of {evaluated} combinations; smallest phi={worst:e}"),
    )
}

fn counterexample() -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [10, 20, 40] {
        let rep = tangent_value(&CexConfig::new(2 * k + 20, 3.0, k)).unwrap();
        let diff = (rep.tangent_direct - rep.tangent_closed_form).abs();
        ok &= rep.tangent_direct >= k as f64 && rep.tangent_closed_form >= k as f64 && diff <= 1e-9;
        parts.push(format!("k={k}: {} (paths differ by {diff:e})", rep.tangent_direct));
    }
    let scan = ball_bound_scan(50, 50, 10_000, 106).unwrap();
    ok &= scan.max_f <= 49.0 / 24.0 + 1e-12;
    let witness = strong_convexity_witness(50, 50, 100, 107).unwrap();
    ok &= witness.min_second_difference >= 1.0 - 1e-4;
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(30);
    verdict(
        ok,
        format!(
            "{}; scan max={} (bound {}); witness min={} in {elapsed:.2?}",
            parts.join(", "),
            scan.max_f,
            49.0 / 24.0,
            witness.min_second_difference
        ),
    )
}

fn rotated(body: &BodyData, angle: f64) -> BodyData {
    let (c, s) = (angle.cos(), angle.sin());
    let rot = |p: &Point| Point::from_vec(vec![c * p[0] - s * p[1], s * p[0] + c * p[1]]);
    BodyData::new(
        2,
        body.points().iter().map(rot).collect(),
        body.normals().iter().map(rot).collect(),
    )
    .unwrap()
}

fn body_checker() -> Verdict {
    let circle = parse_body(&fs::read_to_string(common::fixture("circle64.json")).unwrap()).unwrap();
    let rep = check_body(&circle).unwrap();
    let mut ok = rep.feasible
        && (rep.delta_o - 1.0).abs() <= 1e-12
        && (rep.kw.delta_kw - 0.5).abs() <= 1e-12;
    let mut drift = 0.0_f64;
    for angle in [0.3, 1.0, PI / 7.0, 2.5] {
        let r = check_body(&rotated(&circle, angle)).unwrap();
        drift = drift
            .max((r.delta_o - rep.delta_o).abs())
            .max((r.kw.delta_kw - rep.kw.delta_kw).abs());
    }
    ok &= drift <= 1e-12;
    let antipodal = parse_body(&fs::read_to_string(common::fixture("antipodal.json")).unwrap()).unwrap();
    let anti = check_body(&antipodal).unwrap();
    ok &= !anti.feasible;
    verdict(
        ok,
        format!(
            "delta_O={} delta_KW={} rotation drift={drift:e} antipodal feasible={}",
            rep.delta_o, rep.kw.delta_kw, anti.feasible
        ),
    )
}

fn cli_contract() -> Verdict {
    let mut problems: Vec<String> = common::CASES.iter().filter_map(|c| common::check_case(c).err()).collect();
    let mut revalidated = 0;
    for c in common::CASES.iter().filter(|c| c.name.starts_with("extend") && c.out == Some("json")) {
        let Ok(report) = common::check_case(c) else { continue };
        let Some(Outputs::Extend(out)) = report.outputs else { continue };
        let written = out.written.unwrap();
        let m = out.m.to_string();
        let v = run_from(["cw11", "validate", "--jet", &written, "--M", &m]).unwrap();
        if v.report.exit_status == EXIT_OK {
            revalidated += 1;
        } else {
            problems.push(format!("{}: re-validation exit {}", c.name, v.report.exit_status));
        }
    }
    let mut round_trips = 0;
    for entry in fs::read_dir(common::FIX).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name == "malformed.json" {
            continue;
        }
        let text = fs::read_to_string(&path).unwrap();
        let again = if name.starts_with("queries") {
            to_canonical(&parse::<QueriesFile>(&text).unwrap()).unwrap()
        } else if let Ok(jet) = parse_jet(&text) {
            jet_to_string(&jet).unwrap()
        } else {
            to_canonical(&parse::<BodyFile>(&text).unwrap()).unwrap()
        };
        if again == text {
            round_trips += 1;
        } else {
            problems.push(format!("{name} does not round-trip"));
        }
    }
    verdict(
        problems.is_empty(),
        format!(
            "{} golden cases, {revalidated} extension outputs re-validated, {round_trips} fixtures byte-identical{}",
            common::CASES.len(),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("quadratic oracle", quadratic_oracle),
        ("ball membership vs bracket", membership_equivalence),
        ("minimax certificate", minimax_certificate),
        ("quadratics at the top eigenvalue", quadratic_necessity),
        ("phi diagnostic", phi_nonnegative),
        ("counterexample", counterexample),
        ("body checker", body_checker),
        ("CLI contract", cli_contract),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name}: {}",
            n + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if failed > 0 {
        eprintln!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
