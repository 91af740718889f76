//! Minimax over pairwise balls: the smallest uniform inflation `lambda0` for
//! which the balls `B(Z_i, lambda * r_i)` intersect, and the intersection point.
//!
//! The solver minimizes `max_i w_i ||z - Z_i||^2` (`w_i = 1 / r_i^2`) in
//! coordinates normalized by the spread of the centers. Balls enter a working
//! set only when the current point violates them; each working-set problem is
//! solved by log-barrier path following on `(z, t)` and then refined by
//! exchanging supports, where a support's point solves
//!
//! ```text
//! w_i ||z - Z_i||^2 = t          (i in S)
//! z = sum_S mu_i Z_i,   sum_S mu_i = 1,   mu >= 0
//! ```
//!
//! (`mu_i` is proportional to `xi_i w_i`). Whatever the route, the returned
//! certificate `(lambda0, z0, xi, residual)` is recomputed from the balls
//! themselves.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::balls::{membership_margin, PairBall};
use crate::error::{Error, Result};
use crate::jet::Point;
use crate::tolerance::{ACT_REL, LAMBDA_SLACK, R_ZERO_REL};

const MAX_OUTER: usize = 80;
const MAX_CENTERING: usize = 200;
const MAX_POLISH: usize = 40;
const MAX_EXCHANGES: usize = 200;
const BARRIER_GROWTH: f64 = 10.0;
const BARRIER_GAP_REL: f64 = 1e-10;
const POLISH_WINDOW: f64 = 1e-6;
const DUPLICATE_REL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxResult {
    pub lambda0: f64,
    pub z0: Point,
    /// Indices (into the ball list) whose ratio is within the active window of `lambda0`.
    pub active: Vec<usize>,
    /// Convex weights aligned with `active`.
    pub weights: Vec<f64>,
    pub iterations: usize,
    /// `|| sum_i xi_i (z0 - Z_i) / r_i^2 ||`.
    pub residual: f64,
    /// Index of the zero-radius ball when the singleton branch was taken.
    pub singleton: Option<usize>,
    pub warnings: Vec<String>,
}

impl MinimaxResult {
    /// Checks the certificate against `balls`: simplex weights, containment in
    /// the inflated balls, tightness on the active set and stationarity.
    /// Returns the list of violated conditions (empty when valid).
    pub fn certificate_violations(&self, balls: &[PairBall], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.active.len() != self.weights.len() {
            out.push("weights and active set differ in length".to_string());
            return out;
        }
        if self.weights.iter().any(|&w| !(w >= 0.0)) {
            out.push("negative weight".to_string());
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            out.push(format!("weights sum to {total}"));
        }
        for (i, ball) in balls.iter().enumerate() {
            let dist = (&self.z0 - &ball.center).norm();
            let bound = self.lambda0 * ball.radius;
            if dist > bound + tol * (1.0 + bound) {
                out.push(format!("z0 outside inflated ball {i}: {dist} > {bound}"));
            }
        }
        for &i in &self.active {
            let dist = (&self.z0 - &balls[i].center).norm();
            let bound = self.lambda0 * balls[i].radius;
            if dist < bound - tol.max(ACT_REL * (1.0 + self.lambda0)) * (1.0 + bound) {
                out.push(format!("active ball {i} is not tight: {dist} < {bound}"));
            }
        }
        let residual = stationarity_residual(balls, &self.z0, &self.active, &self.weights);
        if residual > tol {
            out.push(format!("stationarity residual {residual:e} exceeds {tol:e}"));
        }
        out
    }
}

/// `|| sum_k xi_k (z - Z_k) / r_k^2 ||` over the listed balls. Zero-radius
/// balls contribute nothing when `z` coincides with their center.
pub fn stationarity_residual(balls: &[PairBall], z: &Point, idx: &[usize], weights: &[f64]) -> f64 {
    let mut acc = Point::zeros(z.len());
    for (&i, &w) in idx.iter().zip(weights) {
        let ball = &balls[i];
        if w == 0.0 {
            continue;
        }
        let diff = z - &ball.center;
        if ball.radius > 0.0 {
            acc += diff * (w / (ball.radius * ball.radius));
        } else if diff.norm() > 0.0 {
            return f64::INFINITY;
        }
    }
    acc.norm()
}

fn validate(balls: &[PairBall]) -> Result<usize> {
    let first = balls.first().ok_or(Error::TooFewEntries { needed: 1, found: 0 })?;
    let dim = first.center.len();
    for (i, b) in balls.iter().enumerate() {
        if b.center.len() != dim {
            return Err(Error::DimensionMismatch {
                what: format!("ball {i} center"),
                expected: dim,
                found: b.center.len(),
            });
        }
        if !(b.radius.is_finite() && b.radius >= 0.0) || b.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("ball {i}")));
        }
    }
    Ok(dim)
}

fn ratios(balls: &[PairBall], z: &Point) -> Vec<f64> {
    balls
        .iter()
        .map(|b| {
            let d = (z - &b.center).norm();
            if b.radius > 0.0 {
                d / b.radius
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// Minimizes `max_i ||z - Z_i|| / r_i` without judging the size of `lambda0`.
pub fn minimize_max_ratio(balls: &[PairBall], tol: f64) -> Result<MinimaxResult> {
    validate(balls)?;
    let radius_scale = balls.iter().fold(0.0_f64, |m, b| m.max(b.radius));
    let r_zero_tol = R_ZERO_REL * (1.0 + radius_scale);

    if let Some(k) = balls.iter().position(|b| b.radius <= r_zero_tol) {
        return Ok(singleton_result(balls, k, r_zero_tol));
    }

    let groups = merge_duplicates(balls);
    let centers: Vec<&Point> = groups.iter().map(|g| &balls[g[0]].center).collect();
    let radii: Vec<f64> = groups.iter().map(|g| balls[g[0]].radius).collect();

    let dim = centers[0].len();
    let mut origin = Point::zeros(dim);
    for c in &centers {
        origin += *c;
    }
    origin /= centers.len() as f64;
    let spread = centers.iter().fold(0.0_f64, |m, c| m.max((*c - &origin).norm()));
    let center_scale = centers.iter().fold(0.0_f64, |m, c| m.max(c.norm()));

    let (z, iterations) = if spread <= DUPLICATE_REL * (1.0 + center_scale) {
        // all centers coincide: lambda0 = 0 at the common center
        (origin.clone(), 0)
    } else {
        let problem = Scaled::new(&centers, &radii, &origin, spread);
        let (u, iterations) = problem.solve_by_generation()?;
        (problem.unscale(&u), iterations)
    };

    let mut result = assemble(balls, z, iterations);
    if result.residual > tol {
        result.warnings.push(format!(
            "stationarity residual {:e} above tolerance {tol:e}",
            result.residual
        ));
    }
    Ok(result)
}

/// Solves the minimax and enforces the feasibility certificate `lambda0 <= 1`.
///
/// `lambda0` in `(1, 1 + LAMBDA_SLACK]` is accepted with a warning; larger
/// values mean the jet is not (CW11) at the constant used for the balls (or the
/// solver failed).
pub fn solve_minimax(balls: &[PairBall], tol: f64) -> Result<MinimaxResult> {
    let mut result = minimize_max_ratio(balls, tol)?;
    if let Some(k) = result.singleton {
        let scale = balls.iter().fold(0.0_f64, |m, b| m.max(b.radius * b.radius));
        let margin = membership_margin(balls, &result.z0)?;
        if margin > tol * (1.0 + scale) {
            return Err(Error::SingletonOutside { pair: k, margin });
        }
    }
    if result.lambda0 > 1.0 + LAMBDA_SLACK {
        return Err(Error::CertificateFailure {
            lambda0: result.lambda0,
            slack: LAMBDA_SLACK,
        });
    }
    if result.lambda0 > 1.0 {
        result.warnings.push(format!(
            "lambda0 = {} exceeds 1 within the accepted slack",
            result.lambda0
        ));
    }
    Ok(result)
}

fn singleton_result(balls: &[PairBall], k: usize, r_zero_tol: f64) -> MinimaxResult {
    let z0 = balls[k].center.clone();
    let lambda0 = balls
        .iter()
        .filter(|b| b.radius > r_zero_tol)
        .map(|b| (&z0 - &b.center).norm() / b.radius)
        .fold(0.0, f64::max);
    let mut warnings = Vec::new();
    let stray = balls
        .iter()
        .filter(|b| b.radius <= r_zero_tol && (&z0 - &b.center).norm() > r_zero_tol)
        .count();
    if stray > 0 {
        warnings.push(format!("{stray} other zero-radius balls have distinct centers"));
    }
    let act = ACT_REL * (1.0 + lambda0);
    let mut active = vec![k];
    active.extend(balls.iter().enumerate().filter_map(|(i, b)| {
        (i != k && b.radius > r_zero_tol && (&z0 - &b.center).norm() / b.radius >= lambda0 - act)
            .then_some(i)
    }));
    let mut weights = vec![0.0; active.len()];
    weights[0] = 1.0;
    MinimaxResult {
        lambda0,
        z0,
        active,
        weights,
        iterations: 0,
        residual: 0.0,
        singleton: Some(k),
        warnings,
    }
}

/// Groups balls with identical centers and radii; each group is represented once.
fn merge_duplicates(balls: &[PairBall]) -> Vec<Vec<usize>> {
    let scale = balls
        .iter()
        .fold(0.0_f64, |m, b| m.max(b.center.norm()).max(b.radius));
    let eps = DUPLICATE_REL * (1.0 + scale);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, b) in balls.iter().enumerate() {
        let found = groups.iter_mut().find(|g| {
            let rep = &balls[g[0]];
            (rep.radius - b.radius).abs() <= eps && (&rep.center - &b.center).norm() <= eps
        });
        match found {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

fn assemble(
    balls: &[PairBall],
    z0: Point,
    iterations: usize,
) -> MinimaxResult {
    let ratio = ratios(balls, &z0);
    let lambda0 = ratio.iter().copied().fold(0.0, f64::max);
    let act = ACT_REL * (1.0 + lambda0);
    let active: Vec<usize> = (0..balls.len()).filter(|&i| ratio[i] >= lambda0 - act).collect();
    let directions: Vec<DVector<f64>> = active
        .iter()
        .map(|&i| (&z0 - &balls[i].center) / (balls[i].radius * balls[i].radius))
        .collect();
    let weights = min_norm_point(&directions);
    let residual = stationarity_residual(balls, &z0, &active, &weights);
    MinimaxResult {
        lambda0,
        z0,
        active,
        weights,
        iterations,
        residual,
        singleton: None,
        warnings: Vec::new(),
    }
}

/// Convex weights of the minimum-norm point of `conv(points)` (Wolfe's algorithm).
fn min_norm_point(points: &[DVector<f64>]) -> Vec<f64> {
    let n = points.len();
    let scale = points.iter().fold(0.0_f64, |m, p| m.max(p.norm_squared()));
    if n == 0 {
        return Vec::new();
    }
    let eps = 1e-15 * scale.max(f64::MIN_POSITIVE);
    let combine = |w: &[f64]| {
        let mut x = DVector::zeros(points[0].len());
        for (p, &wi) in points.iter().zip(w) {
            if wi != 0.0 {
                x += p * wi;
            }
        }
        x
    };

    let start = (0..n)
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .expect("nonempty");
    let mut weights = vec![0.0; n];
    weights[start] = 1.0;
    let mut corral = vec![start];
    let mut x = points[start].clone();

    for _ in 0..(10 * n + 100) {
        let xx = x.norm_squared();
        let (j, xj) = (0..n)
            .map(|j| (j, x.dot(&points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if xj >= xx - eps || corral.contains(&j) {
            break;
        }
        corral.push(j);
        loop {
            let alpha = affine_minimizer(points, &corral);
            if alpha.iter().all(|&a| a > 0.0) {
                for (&k, &a) in corral.iter().zip(&alpha) {
                    weights[k] = a;
                }
                break;
            }
            let mut theta = 1.0_f64;
            for (&k, &a) in corral.iter().zip(&alpha) {
                if a <= 0.0 {
                    let lam = weights[k];
                    let denom = lam - a;
                    if denom > 0.0 {
                        theta = theta.min(lam / denom);
                    }
                }
            }
            for (&k, &a) in corral.iter().zip(&alpha) {
                weights[k] = theta * a + (1.0 - theta) * weights[k];
            }
            let before = corral.len();
            corral.retain(|&k| weights[k] > 0.0);
            for k in 0..n {
                if !corral.contains(&k) {
                    weights[k] = 0.0;
                }
            }
            if corral.len() == before {
                // no progress possible: drop the smallest weight
                let (pos, _) = corral
                    .iter()
                    .enumerate()
                    .min_by(|a, b| weights[*a.1].total_cmp(&weights[*b.1]))
                    .expect("nonempty corral");
                weights[corral[pos]] = 0.0;
                corral.remove(pos);
            }
            let total: f64 = corral.iter().map(|&k| weights[k]).sum();
            corral.iter().for_each(|&k| weights[k] /= total);
        }
        x = combine(&weights);
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    weights
}

/// Full-pivot LU, falling back to a truncated SVD solve when the matrix is singular.
/// (nalgebra's SVD loses digits when singular values nearly coincide, so it is
/// only the fallback.)
fn solve_square(mat: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = mat.clone().full_piv_lu();
    if let Some(x) = lu.solve(rhs).filter(|x| x.iter().all(|v| v.is_finite())) {
        return Some(x);
    }
    let eps = 1e-14 * mat.amax();
    mat.svd(true, true).solve(rhs, eps).ok()
}

/// Weights `alpha` (summing to one) minimizing `|sum alpha_k p_k|` over the affine hull.
fn affine_minimizer(points: &[DVector<f64>], corral: &[usize]) -> Vec<f64> {
    let k = corral.len();
    let mut sys = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = DVector::zeros(k + 1);
    for (a, &i) in corral.iter().enumerate() {
        for (b, &j) in corral.iter().enumerate() {
            sys[(a, b)] = points[i].dot(&points[j]);
        }
        sys[(a, k)] = 1.0;
        sys[(k, a)] = 1.0;
    }
    rhs[k] = 1.0;
    let sol = solve_square(sys, &rhs).unwrap_or_else(|| DVector::from_element(k + 1, 1.0 / k as f64));
    let alpha: Vec<f64> = (0..k).map(|a| sol[a]).collect();
    let total: f64 = alpha.iter().sum();
    if total.is_finite() && total.abs() > 0.0 {
        alpha.iter().map(|a| a / total).collect()
    } else {
        vec![1.0 / k as f64; k]
    }
}

/// Problem in normalized coordinates `u = (z - origin) / scale`; ratios are unchanged.
struct Scaled {
    centers: Vec<DVector<f64>>,
    weights: Vec<f64>,
    origin: Point,
    scale: f64,
}

struct Basis {
    support: Vec<usize>,
    u: DVector<f64>,
    level: f64,
}

struct BarrierPoint {
    u: DVector<f64>,
    iterations: usize,
}

impl Scaled {
    fn new(centers: &[&Point], radii: &[f64], origin: &Point, scale: f64) -> Self {
        Scaled {
            centers: centers.iter().map(|c| (*c - origin) / scale).collect(),
            weights: radii.iter().map(|r| scale * scale / (r * r)).collect(),
            origin: origin.clone(),
            scale,
        }
    }

    fn unscale(&self, u: &DVector<f64>) -> Point {
        &self.origin + u * self.scale
    }

    fn q(&self, k: usize, u: &DVector<f64>) -> f64 {
        self.weights[k] * (u - &self.centers[k]).norm_squared()
    }

    fn max_q(&self, u: &DVector<f64>) -> f64 {
        (0..self.centers.len()).map(|k| self.q(k, u)).fold(0.0, f64::max)
    }

    fn subset(&self, idx: &[usize]) -> Self {
        Scaled {
            centers: idx.iter().map(|&k| self.centers[k].clone()).collect(),
            weights: idx.iter().map(|&k| self.weights[k]).collect(),
            origin: self.origin.clone(),
            scale: self.scale,
        }
    }

    /// Constraint generation: solve on a small working set, then add the balls
    /// its solution violates. Keeping the barrier problems small keeps their
    /// duality gap bounds tight, which the path following relies on.
    fn solve_by_generation(&self) -> Result<(DVector<f64>, usize)> {
        let m = self.centers.len();
        let dim = self.centers[0].len();
        let batch = dim + 2;
        let wsum: f64 = self.weights.iter().sum();
        let mut u = DVector::zeros(dim);
        for (c, w) in self.centers.iter().zip(&self.weights) {
            u += c * (*w / wsum);
        }
        let mut working: Vec<usize> = Vec::new();
        let mut iterations = 0;
        loop {
            let mut outside: Vec<(usize, f64)> = (0..m)
                .filter(|k| !working.contains(k))
                .map(|k| (k, self.q(k, &u)))
                .collect();
            let t = working.iter().map(|&k| self.q(k, &u)).fold(0.0, f64::max);
            outside.retain(|&(_, q)| working.is_empty() || q > t * (1.0 + 1e-13));
            if outside.is_empty() {
                return Ok((u, iterations));
            }
            outside.sort_by(|a, b| b.1.total_cmp(&a.1));
            working.extend(outside.iter().take(batch).map(|&(k, _)| k));
            working.sort_unstable();

            let sub = self.subset(&working);
            if working.len() == 1 {
                u = sub.centers[0].clone();
                continue;
            }
            let barrier = sub.barrier()?;
            iterations += barrier.iterations;
            u = sub.polish(&barrier).unwrap_or_else(|| barrier.u.clone());
        }
    }

    fn barrier(&self) -> Result<BarrierPoint> {
        let m = self.centers.len();
        let dim = self.centers[0].len();
        let wsum: f64 = self.weights.iter().sum();
        let mut u = DVector::zeros(dim);
        for (c, w) in self.centers.iter().zip(&self.weights) {
            u += c * (*w / wsum);
        }
        let q0 = self.max_q(&u);
        let mut t = q0 * 1.1 + 1e-12;
        let mut tau = m as f64 / t;
        let mut iterations = 0;
        let mut slacks = vec![0.0; m];

        for _ in 0..MAX_OUTER {
            let mut centered = false;
            for _ in 0..MAX_CENTERING {
                iterations += 1;
                for (k, s) in slacks.iter_mut().enumerate() {
                    *s = t - self.q(k, &u);
                }
                let (grad, hess) = self.newton_system(&u, tau, &slacks);
                let step = match hess.clone().cholesky() {
                    Some(ch) => ch.solve(&(-&grad)),
                    None => match hess.lu().solve(&(-&grad)) {
                        Some(s) => s,
                        None => break,
                    },
                };
                let slope = grad.dot(&step);
                let decrement = (-slope).max(0.0).sqrt();
                let phi0 = self.barrier_value(&u, t, tau);
                let mut alpha = 1.0;
                let mut accepted = false;
                for _ in 0..60 {
                    let u_new = &u + step.rows(0, dim) * alpha;
                    let t_new = t + step[dim] * alpha;
                    let phi = self.barrier_value(&u_new, t_new, tau);
                    // Armijo test; near the center rounding dominates, so only
                    // strict feasibility is required there
                    if phi.is_finite() && (phi <= phi0 + 0.25 * alpha * slope || decrement < 1e-3) {
                        u = u_new;
                        t = t_new;
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                }
                if decrement < 1e-6 {
                    centered = true;
                    break;
                }
                if !accepted {
                    break;
                }
            }
            // dual estimates are only meaningful at a central point; stop
            // tightening once centering stalls and leave the rest to the polish
            if !centered || m as f64 / tau <= BARRIER_GAP_REL * t {
                break;
            }
            tau *= BARRIER_GROWTH;
        }
        if !(t.is_finite() && u.iter().all(|c| c.is_finite())) {
            return Err(Error::NoConvergence { iterations });
        }

        Ok(BarrierPoint { u, iterations })
    }

    /// `tau t - sum_k log(t - q_k(u))`, or `+inf` outside the domain.
    fn barrier_value(&self, u: &DVector<f64>, t: f64, tau: f64) -> f64 {
        let mut phi = tau * t;
        for k in 0..self.centers.len() {
            let s = t - self.q(k, u);
            if !(s > 0.0) {
                return f64::INFINITY;
            }
            phi -= s.ln();
        }
        phi
    }

    /// Gradient and Hessian of `tau t - sum_k log(t - q_k(u))`.
    fn newton_system(
        &self,
        u: &DVector<f64>,
        tau: f64,
        slacks: &[f64],
    ) -> (DVector<f64>, DMatrix<f64>) {
        let dim = u.len();
        let mut grad = DVector::zeros(dim + 1);
        let mut hess = DMatrix::zeros(dim + 1, dim + 1);
        grad[dim] = tau;
        for (k, &s) in slacks.iter().enumerate() {
            let w = self.weights[k];
            let dq = (u - &self.centers[k]) * (2.0 * w);
            let inv = 1.0 / s;
            let inv2 = inv * inv;
            for a in 0..dim {
                grad[a] += dq[a] * inv;
                for b in 0..dim {
                    hess[(a, b)] += dq[a] * dq[b] * inv2;
                }
                hess[(a, a)] += 2.0 * w * inv;
                hess[(a, dim)] -= dq[a] * inv2;
                hess[(dim, a)] -= dq[a] * inv2;
            }
            grad[dim] -= inv;
            hess[(dim, dim)] += inv2;
        }
        (grad, hess)
    }

    /// Active-set refinement of the barrier point. A support is a set of at
    /// most `dim + 1` balls with nonnegative KKT multipliers; its level `t` is
    /// the minimax value over the support alone, so the optimum is the largest
    /// level over all supports. Violated balls are exchanged in while the level
    /// strictly increases. Returns the refined point when it does not worsen
    /// the objective.
    fn polish(&self, start: &BarrierPoint) -> Option<DVector<f64>> {
        let dim = start.u.len();
        let m = self.centers.len();
        let before = self.max_q(&start.u);
        // near-active balls at the barrier point; the corral of the minimum-norm
        // point of their gradients is an affinely independent support with
        // positive multipliers
        let near: Vec<usize> = (0..m)
            .filter(|&k| self.q(k, &start.u) >= before * (1.0 - POLISH_WINDOW))
            .collect();
        let grads: Vec<DVector<f64>> = near
            .iter()
            .map(|&k| (&start.u - &self.centers[k]) * self.weights[k])
            .collect();
        let corral = min_norm_point(&grads);
        let mut support: Vec<usize> = near
            .iter()
            .zip(&corral)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&k, _)| k)
            .collect();
        support.truncate(dim + 1);

        let mut current = self.reduce_support(&start.u, support, before)?;
        let mut best: Option<(f64, DVector<f64>)> = None;
        for _ in 0..MAX_EXCHANGES {
            let after = self.max_q(&current.u);
            if after <= before * (1.0 + 1e-13) && best.as_ref().is_none_or(|(v, _)| after < *v) {
                best = Some((after, current.u.clone()));
            }
            let Some((k, qk)) = (0..m)
                .filter(|k| !current.support.contains(k))
                .map(|k| (k, self.q(k, &current.u)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
            else {
                break;
            };
            if qk <= current.level * (1.0 + 1e-13) {
                break;
            }
            let mut candidates: Vec<Vec<usize>> = Vec::new();
            if current.support.len() <= dim {
                let mut s = current.support.clone();
                s.push(k);
                candidates.push(s);
            }
            for j in 0..current.support.len() {
                let mut s = current.support.clone();
                s[j] = k;
                candidates.push(s);
            }
            let next = candidates
                .into_iter()
                .filter_map(|s| self.reduce_support(&current.u, s, before))
                // no basis can exceed the barrier's upper bound on the optimum
                .filter(|b| b.support.contains(&k) && b.level <= before * (1.0 + 1e-9))
                .max_by(|a, b| a.level.total_cmp(&b.level))?;
            if next.level <= current.level * (1.0 + 1e-15) {
                break;
            }
            current = next;
        }
        best.map(|(_, u)| u)
    }

    /// Solves the KKT system on `support`, dropping balls with negative
    /// multipliers until the remaining ones are nonnegative.
    fn reduce_support(&self, u0: &DVector<f64>, mut support: Vec<usize>, scale: f64) -> Option<Basis> {
        loop {
            if support.len() == 1 {
                let u = self.centers[support[0]].clone();
                return Some(Basis { support, u, level: 0.0 });
            }
            let (u, mu) = self.kkt_newton(u0, &support, scale)?;
            let (jmin, mumin) = mu
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))?;
            if mumin < -1e-10 {
                support.remove(jmin);
                continue;
            }
            let level = support.iter().map(|&k| self.q(k, &u)).fold(0.0, f64::max);
            return Some(Basis { support, u, level });
        }
    }

    /// Least-squares solution of `u = sum mu_k Z_k`, `sum mu = 1` at fixed `u`.
    fn mean_weights(&self, u: &DVector<f64>, support: &[usize]) -> Option<Vec<f64>> {
        let dim = u.len();
        let mut a = DMatrix::zeros(dim + 1, support.len());
        let mut b = DVector::zeros(dim + 1);
        for (j, &k) in support.iter().enumerate() {
            a.view_mut((0, j), (dim, 1)).copy_from(&self.centers[k]);
            a[(dim, j)] = 1.0;
        }
        b.rows_mut(0, dim).copy_from(u);
        b[dim] = 1.0;
        let mu = a.svd(true, true).solve(&b, 1e-14).ok()?;
        mu.iter().all(|v| v.is_finite()).then(|| mu.iter().copied().collect())
    }

    /// Newton iterations on the KKT system of the support written with
    /// `mu_k = xi_k w_k / sum_j xi_j w_j`, which turns stationarity into the
    /// well-scaled weighted-mean condition:
    ///
    /// ```text
    /// q_k(u) = t,   u = sum mu_k Z_k,   sum mu_k = 1
    /// ```
    ///
    /// `mu` and `xi` have the same signs. Returns `None` unless the residual
    /// reaches rounding level.
    fn kkt_newton(
        &self,
        u0: &DVector<f64>,
        support: &[usize],
        scale: f64,
    ) -> Option<(DVector<f64>, Vec<f64>)> {
        let dim = u0.len();
        let ns = support.len();
        let n = dim + 1 + ns;
        let mut u = u0.clone();
        let mut t = support.iter().map(|&k| self.q(k, &u)).fold(0.0, f64::max);
        let mut mu = self
            .mean_weights(&u, support)
            .unwrap_or_else(|| vec![1.0 / ns as f64; ns]);

        // level rows are divided by (1 + scale) so both blocks are O(1)
        let level_unit = 1.0 + scale;
        let residual = |u: &DVector<f64>, t: f64, mu: &[f64]| {
            let mut r = DVector::zeros(n);
            let mut mean = -u.clone();
            for (j, &k) in support.iter().enumerate() {
                r[j] = (self.q(k, u) - t) / level_unit;
                mean += &self.centers[k] * mu[j];
            }
            r.rows_mut(ns, dim).copy_from(&mean);
            r[n - 1] = mu.iter().sum::<f64>() - 1.0;
            r
        };

        let mut r = residual(&u, t, &mu);
        for _ in 0..MAX_POLISH {
            if r.norm() <= 1e-15 * (1.0 + u.norm()) {
                break;
            }
            let mut jac = DMatrix::zeros(n, n);
            for (row, &k) in support.iter().enumerate() {
                let dq = (&u - &self.centers[k]) * (2.0 * self.weights[k] / level_unit);
                for a in 0..dim {
                    jac[(row, a)] = dq[a];
                }
                jac[(row, dim)] = -1.0 / level_unit;
            }
            for a in 0..dim {
                jac[(ns + a, a)] = -1.0;
            }
            for (j, &k) in support.iter().enumerate() {
                for a in 0..dim {
                    jac[(ns + a, dim + 1 + j)] = self.centers[k][a];
                }
                jac[(n - 1, dim + 1 + j)] = 1.0;
            }
            let step = solve_square(jac, &(-&r))?;
            let mut alpha = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let u_new = &u + step.rows(0, dim) * alpha;
                let t_new = t + step[dim] * alpha;
                let mu_new: Vec<f64> = (0..ns).map(|j| mu[j] + step[dim + 1 + j] * alpha).collect();
                let r_new = residual(&u_new, t_new, &mu_new);
                if r_new.norm() < r.norm() {
                    u = u_new;
                    t = t_new;
                    mu = mu_new;
                    r = r_new;
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if !u.iter().all(|c| c.is_finite()) || !(r.norm() <= 1e-12 * (1.0 + u.norm())) {
            return None;
        }
        Some((u, mu))
    }
}
