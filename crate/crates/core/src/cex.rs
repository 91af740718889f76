//! Finite truncation of a bounded smooth convex function on a neighborhood of
//! the unit ball of `l2` whose restriction to the ball has no convex extension.
//!
//! With `e~_n = e_1 / 2 + (sqrt 3 / 2) e_n` and `h_n(x) = <x, e~_n>`,
//!
//! ```text
//! f(x) = sum_{n=2}^{K} h_n(x)^{2n},      F(x) = f(x) + |x|^2 / 2.
//! ```
//!
//! The tangent planes of `F` at `e~_k` evaluated at `r e_1` grow at least like
//! `k (r - 2)`, so the minimal convex extension is `+inf` there for `r > 2`.
//! Coordinates are zero-based: `e_1` is index 0 and `e_n` is index `n - 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Point;
use crate::sample::uniform_in_ball;

/// `sup f` over the closed unit ball: `1 + sum_{n>=2} (5/8)^n`.
pub const BALL_BOUND: f64 = 49.0 / 24.0;
/// `sum_{n>=2} 16^{-n}`.
pub const TAIL_SQUARES: f64 = 1.0 / 240.0;
/// `sum_{n>=2} 2n 4^{1-2n}`.
pub const TAIL_SLOPES: f64 = 31.0 / 450.0;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;
const TRUNCATION_TOL: f64 = 1e-12;

fn check_domain(x: &Point, terms: usize) -> Result<()> {
    if terms < 2 {
        return Err(Error::InvalidParameter(format!(
            "series truncation must be at least 2, got {terms}"
        )));
    }
    if x.len() < terms {
        return Err(Error::DimensionMismatch {
            what: "evaluation point (needs dim >= K)".into(),
            expected: terms,
            found: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("evaluation point".into()));
    }
    let norm = x.norm();
    if norm >= 2.0 {
        return Err(Error::DomainViolation { norm });
    }
    Ok(())
}

fn h(x: &Point, n: usize) -> f64 {
    0.5 * x[0] + SQRT3_2 * x[n - 1]
}

/// `e~_n` in dimension `dim`.
pub fn tilde_e(dim: usize, n: usize) -> Point {
    let mut e = Point::zeros(dim);
    e[0] += 0.5;
    e[n - 1] += SQRT3_2;
    e
}

/// `f(x) = sum_{n=2}^{K} h_n(x)^{2n}` on `|x| < 2`.
pub fn eval_f(x: &Point, terms: usize) -> Result<f64> {
    check_domain(x, terms)?;
    Ok((2..=terms).map(|n| h(x, n).powi(2 * n as i32)).sum())
}

/// `F = f + |x|^2 / 2` and its gradient.
pub fn eval_f_and_grad(x: &Point, terms: usize) -> Result<(f64, Point)> {
    check_domain(x, terms)?;
    let mut value = 0.5 * x.norm_squared();
    let mut grad = x.clone();
    for n in 2..=terms {
        let hn = h(x, n);
        let p = hn.powi(2 * n as i32 - 1);
        value += p * hn;
        let c = 2.0 * n as f64 * p;
        grad[0] += 0.5 * c;
        grad[n - 1] += SQRT3_2 * c;
    }
    Ok((value, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CexConfig {
    pub dim: usize,
    /// Series truncation `K` (terms `n = 2..=K`).
    pub terms: usize,
    pub r: f64,
    /// Tangent index `k`.
    pub k: usize,
}

impl CexConfig {
    /// `dim = K`.
    pub fn new(terms: usize, r: f64, k: usize) -> Self {
        CexConfig {
            dim: terms,
            terms,
            r,
            k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2 <= self.k && self.k <= self.terms && self.terms <= self.dim) {
            return Err(Error::InvalidParameter(format!(
                "need 2 <= k <= K <= dim, got k={}, K={}, dim={}",
                self.k, self.terms, self.dim
            )));
        }
        if !self.r.is_finite() {
            return Err(Error::NonFinite("r".into()));
        }
        Ok(())
    }

    /// Size of the dropped terms `n > K` in the tangent value at `e~_k`.
    pub fn truncation_tail(&self) -> f64 {
        let slope = (self.r / 2.0 - 0.25).abs();
        (self.terms + 1..self.terms + 200)
            .map(|n| {
                let q = 0.25_f64.powi(2 * n as i32 - 1);
                0.25 * q + 2.0 * n as f64 * q * slope
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CexReport {
    pub config: CexConfig,
    pub f_value: f64,
    #[serde(rename = "F_value")]
    pub big_f_value: f64,
    #[serde(rename = "grad_F")]
    pub grad_big_f: Point,
    /// `F(e~_k) + <grad F(e~_k), r e_1 - e~_k>` from the gradient.
    pub tangent_direct: f64,
    /// The same quantity from the term-by-term closed form.
    pub tangent_closed_form: f64,
    /// `k (r - 2)`.
    pub lower_bound: f64,
    pub warnings: Vec<String>,
}

impl CexReport {
    pub fn paths_agree(&self, rel: f64) -> bool {
        (self.tangent_direct - self.tangent_closed_form).abs()
            <= rel * (1.0 + self.tangent_closed_form.abs())
    }
}

/// Closed form with the sums truncated at `K`:
/// `1 + S + 1/2 + T (r/2 - 1/4) + 2k (r/2 - 1) + (r/2 - 1)`, where
/// `S = sum_{n != k} (1/4)^{2n}` and `T = sum_{n != k} 2n (1/4)^{2n-1}`.
pub fn tangent_closed_form(cfg: &CexConfig) -> f64 {
    let (k, r) = (cfg.k, cfg.r);
    let mut s = 0.0;
    let mut t = 0.0;
    for n in (2..=cfg.terms).filter(|&n| n != k) {
        let q = 0.25_f64.powi(2 * n as i32 - 1);
        s += 0.25 * q;
        t += 2.0 * n as f64 * q;
    }
    1.0 + s + 0.5 + t * (r / 2.0 - 0.25) + 2.0 * k as f64 * (r / 2.0 - 1.0) + (r / 2.0 - 1.0)
}

/// Closed form of the untruncated series via [`TAIL_SQUARES`] and [`TAIL_SLOPES`].
pub fn tangent_infinite(r: f64, k: usize) -> f64 {
    let q = 0.25_f64.powi(2 * k as i32 - 1);
    let s = TAIL_SQUARES - 0.25 * q;
    let t = TAIL_SLOPES - 2.0 * k as f64 * q;
    1.0 + s + 0.5 + t * (r / 2.0 - 0.25) + 2.0 * k as f64 * (r / 2.0 - 1.0) + (r / 2.0 - 1.0)
}

/// Tangent plane of `F` at `e~_k` evaluated at `r e_1`, by two routes.
pub fn tangent_value(cfg: &CexConfig) -> Result<CexReport> {
    cfg.validate()?;
    let ek = tilde_e(cfg.dim, cfg.k);
    let f_value = eval_f(&ek, cfg.terms)?;
    let (big_f, grad) = eval_f_and_grad(&ek, cfg.terms)?;
    let mut target = Point::zeros(cfg.dim);
    target[0] = cfg.r;
    let tangent_direct = big_f + grad.dot(&(target - &ek));

    let mut warnings = Vec::new();
    let tail = cfg.truncation_tail();
    if tail > TRUNCATION_TOL {
        warnings.push(format!(
            "series truncated at K={} drops about {tail:.3e} of the untruncated value",
            cfg.terms
        ));
    }
    Ok(CexReport {
        config: *cfg,
        f_value,
        big_f_value: big_f,
        grad_big_f: grad,
        tangent_direct,
        tangent_closed_form: tangent_closed_form(cfg),
        lower_bound: cfg.k as f64 * (cfg.r - 2.0),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub dim: usize,
    pub terms: usize,
    pub samples: usize,
    pub seed: u64,
    pub max_f: f64,
    pub argmax: Point,
    pub bound: f64,
    pub within_bound: bool,
}

/// Maximum of `f` over `samples` uniform points of the closed unit ball.
pub fn ball_bound_scan(dim: usize, terms: usize, samples: usize, seed: u64) -> Result<ScanReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if dim < terms {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} is smaller than the truncation K={terms}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_f = f64::NEG_INFINITY;
    let mut argmax = Point::zeros(dim);
    for _ in 0..samples {
        let x = uniform_in_ball(&mut rng, dim, 1.0);
        let v = eval_f(&x, terms)?;
        if v > max_f {
            max_f = v;
            argmax = x;
        }
    }
    Ok(ScanReport {
        dim,
        terms,
        samples,
        seed,
        max_f,
        argmax,
        bound: BALL_BOUND,
        within_bound: max_f <= BALL_BOUND + 1e-12,
    })
}

/// Tangent values at `r e_1` for each `k` (with `dim = K`); requires `r > 2`.
pub fn mc_divergence_sweep(r: f64, ks: &[usize], terms: usize) -> Result<Vec<CexReport>> {
    if !(r > 2.0) {
        return Err(Error::InvalidParameter(format!(
            "divergence needs r > 2, got {r}"
        )));
    }
    ks.iter()
        .map(|&k| tangent_value(&CexConfig::new(terms, r, k)))
        .collect()
}

/// `(F(x + s v) - 2 F(x) + F(x - s v)) / s^2`.
pub fn second_difference(x: &Point, v: &Point, step: f64, terms: usize) -> Result<f64> {
    let (fp, _) = eval_f_and_grad(&(x + v * step), terms)?;
    let (f0, _) = eval_f_and_grad(x, terms)?;
    let (fm, _) = eval_f_and_grad(&(x - v * step), terms)?;
    Ok((fp - 2.0 * f0 + fm) / (step * step))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub dim: usize,
    pub terms: usize,
    pub samples: usize,
    pub seed: u64,
    pub step: f64,
    /// Smallest second difference seen; `F - |x|^2 / 2` is convex, so it should not drop below 1.
    pub min_second_difference: f64,
}

/// Second differences of `F` along random unit directions at random points of the unit ball.
pub fn strong_convexity_witness(
    dim: usize,
    terms: usize,
    samples: usize,
    seed: u64,
) -> Result<WitnessReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let step = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_second_difference = f64::INFINITY;
    for _ in 0..samples {
        let x = uniform_in_ball(&mut rng, dim, 1.0);
        let mut v = uniform_in_ball(&mut rng, dim, 1.0);
        let norm = v.norm();
        if norm == 0.0 {
            continue;
        }
        v /= norm;
        min_second_difference = min_second_difference.min(second_difference(&x, &v, step, terms)?);
    }
    Ok(WitnessReport {
        dim,
        terms,
        samples,
        seed,
        step,
        min_second_difference,
    })
}

/// `t / 2 + (sqrt 3 / 2) sqrt(1 - t^2)`; bounds `h_n` on the ball when one coordinate is `t`.
pub fn aux_single(t: f64) -> f64 {
    0.5 * t + SQRT3_2 * (1.0 - t * t).max(0.0).sqrt()
}

/// `t / 2 + (sqrt 3 / 2) sqrt((1 - t^2) / 2)`; the two-coordinate split.
pub fn aux_split(t: f64) -> f64 {
    0.5 * t + SQRT3_2 * ((1.0 - t * t) / 2.0).max(0.0).sqrt()
}

/// Maximizer and maximum of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_max(func: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (func(a), func(b));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = func(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = func(a);
        }
    }
    let t = 0.5 * (lo + hi);
    (t, func(t))
}
