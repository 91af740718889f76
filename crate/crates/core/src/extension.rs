//! Pointwise extension of (CW11) jets.
//!
//! At a new point `x` the gradient is taken as the minimax center of the
//! pairwise balls, and the value is any number of the bracket
//!
//! ```text
//! s(x) = max_a  f(a) + <G(a), x - a> + |G(x) - G(a)|^2 / (2M)
//! I(x) = min_b  f(b) - <G(x), b - x> - |G(x) - G(b)|^2 / (2M)
//! ```
//!
//! which is nonempty whenever the balls intersect. Repeating the step keeps the
//! augmented jet (CW11) with the same constant.

use std::cmp::Ordering;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::balls::pair_balls;
use crate::cw::min_gap;
use crate::error::{Error, Result};
use crate::jet::{Jet, JetEntry, Point};
use crate::minimax::solve_minimax;
use crate::tolerance::{BRACKET_REL, EXTEND_REL, KKT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionStep {
    pub x: Point,
    pub gx: Point,
    pub s: f64,
    pub i: f64,
    pub fx: f64,
    pub lambda0: f64,
    pub theta: f64,
    /// Set when `x` is already a jet point; the stored values are echoed.
    pub echoed: Option<usize>,
    pub active: usize,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionTrace {
    pub steps: Vec<ExtensionStep>,
    pub jet: Jet,
    pub m: f64,
    /// `cw11_gap` of the final jet at `m` (`+inf` for fewer than two entries).
    pub final_gap: f64,
}

/// Processing order for a batch of queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryOrder {
    /// As supplied. Different orders may give different, equally valid, extensions.
    #[default]
    Given,
    /// Lexicographic in the coordinates.
    Canonical,
}

impl FromStr for QueryOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "given" => Ok(QueryOrder::Given),
            "canonical" => Ok(QueryOrder::Canonical),
            other => Err(Error::InvalidParameter(format!("unknown order '{other}'"))),
        }
    }
}

/// The bracket `[s(x), I(x)]` for a candidate gradient `gx`. No feasibility
/// requirement on `gx`: callers compare `s` and `I`.
pub fn bracket(jet: &Jet, m: f64, x: &Point, gx: &Point) -> Result<(f64, f64)> {
    if jet.is_empty() {
        return Err(Error::TooFewEntries { needed: 1, found: 0 });
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "M must be positive and finite, got {m}"
        )));
    }
    jet.check_point(x, "query point")?;
    jet.check_point(gx, "candidate gradient")?;
    let inv = 0.5 / m;
    let mut s = f64::NEG_INFINITY;
    let mut i = f64::INFINITY;
    for e in jet.entries() {
        let dg2 = (gx - &e.g).norm_squared();
        s = s.max(e.f + e.g.dot(&(x - &e.x)) + inv * dg2);
        i = i.min(e.f - gx.dot(&(&e.x - x)) - inv * dg2);
    }
    Ok((s, i))
}

/// `max_a f(a) + <G(a), x - a>`: the largest tangent value at `x`.
pub fn minimal_convex_extension(jet: &Jet, x: &Point) -> Result<f64> {
    if jet.is_empty() {
        return Err(Error::TooFewEntries { needed: 1, found: 0 });
    }
    jet.check_point(x, "query point")?;
    Ok(jet
        .entries()
        .iter()
        .map(|e| e.f + e.g.dot(&(x - &e.x)))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Value and gradient at `x` such that the augmented jet stays (CW11) at `m`.
///
/// `theta` in `[0, 1]` selects `fx = s + theta (I - s)`. A query on a jet point
/// returns the stored values unchanged.
pub fn extend_point(jet: &Jet, m: f64, x: &Point, theta: f64) -> Result<ExtensionStep> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in [0, 1], got {theta}"
        )));
    }
    jet.check_point(x, "query point")?;
    if let Some(idx) = jet.find_point(x) {
        let e = jet.entry(idx);
        return Ok(ExtensionStep {
            x: e.x.clone(),
            gx: e.g.clone(),
            s: e.f,
            i: e.f,
            fx: e.f,
            lambda0: 0.0,
            theta,
            echoed: Some(idx),
            active: 0,
            residual: 0.0,
            warnings: Vec::new(),
        });
    }

    let balls = pair_balls(jet, m, x)?;
    let minimax = solve_minimax(&balls, KKT_TOL)?;
    let gx = minimax.z0;
    let (s, i) = bracket(jet, m, x, &gx)?;
    if s > i + BRACKET_REL * (1.0 + s.abs() + i.abs()) {
        return Err(Error::BracketInversion { s, i });
    }
    let fx = if i > s { s + theta * (i - s) } else { 0.5 * (s + i) };
    Ok(ExtensionStep {
        x: x.clone(),
        gx,
        s,
        i,
        fx,
        lambda0: minimax.lambda0,
        theta,
        echoed: None,
        active: minimax.active.len(),
        residual: minimax.residual,
        warnings: minimax.warnings,
    })
}

/// Lexicographic comparison of coordinates.
fn lex_cmp(a: &Point, b: &Point) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Applies [`extend_point`] to every query in turn, augmenting the jet after
/// each step, and verifies the final jet at `m`.
///
/// Queries that coincide with a point already in the jet (original or added
/// earlier in the batch) are echoed and do not add an entry.
pub fn extend_many(
    jet: &Jet,
    m: f64,
    queries: &[Point],
    theta: f64,
    order: QueryOrder,
) -> Result<ExtensionTrace> {
    let mut ordered: Vec<&Point> = queries.iter().collect();
    if order == QueryOrder::Canonical {
        ordered.sort_by(|a, b| lex_cmp(a, b));
    }
    let mut current = jet.clone();
    let mut steps = Vec::with_capacity(ordered.len());
    for (index, x) in ordered.into_iter().enumerate() {
        let step = extend_point(&current, m, x, theta).map_err(|e| Error::at_step(index, e))?;
        if step.echoed.is_none() {
            current = current
                .augmented(JetEntry::new(step.x.clone(), step.fx, step.gx.clone()))
                .map_err(|e| Error::at_step(index, e))?;
        }
        steps.push(step);
    }
    let final_gap = min_gap(&current, m);
    if final_gap < -EXTEND_REL * (1.0 + current.value_scale()) {
        return Err(Error::Inconsistent { m, gap: final_gap });
    }
    Ok(ExtensionTrace {
        steps,
        jet: current,
        m,
        final_gap,
    })
}
