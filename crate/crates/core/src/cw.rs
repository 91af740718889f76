//! Pairwise functionals of a 1-jet: the (CW11) gap, the minimal admissible
//! constant, the gradient Lipschitz constant, the quadratic growth bound and
//! Le Gruyer's functional.
//!
//! All sups and infs are taken exactly over ordered pairs, `O(n^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, JetEntry};
use crate::tolerance::{ABS_REL, GRAD_REL};

/// `D(x, y) = f(x) - f(y) - <G(y), x - y>`.
pub fn taylor_defect(x: &JetEntry, y: &JetEntry) -> f64 {
    x.f - y.f - y.g.dot(&(&x.x - &y.x))
}

fn require_entries(jet: &Jet, needed: usize) -> Result<()> {
    if jet.len() < needed {
        return Err(Error::TooFewEntries {
            needed,
            found: jet.len(),
        });
    }
    Ok(())
}

fn require_constant(m: f64) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "M must be positive and finite, got {m}"
        )));
    }
    Ok(())
}

fn ordered_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
}

/// Minimum over ordered pairs of `D(x, y) - ||G(x) - G(y)||^2 / (2M)`.
///
/// The jet satisfies (CW11) with constant `m` iff the result is `>= 0`.
pub fn cw11_gap(jet: &Jet, m: f64) -> Result<f64> {
    require_entries(jet, 2)?;
    require_constant(m)?;
    Ok(min_gap(jet, m))
}

/// Same as [`cw11_gap`] but accepts `m = +inf` (plain subgradient inequality)
/// and single-entry jets (returns `+inf`).
pub(crate) fn min_gap(jet: &Jet, m: f64) -> f64 {
    let e = jet.entries();
    ordered_pairs(e.len())
        .map(|(i, j)| {
            let d = taylor_defect(&e[i], &e[j]);
            if m.is_infinite() {
                d
            } else {
                d - (&e[i].g - &e[j].g).norm_squared() / (2.0 * m)
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Feasibility summary of a jet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwReport {
    pub feasible: bool,
    /// Smallest admissible constant; `+inf` when infeasible, `0` for constant-gradient data.
    #[serde(with = "crate::serde_ext")]
    pub minimal_m: f64,
    /// Ordered pair `(x, y)` attaining the sup (feasible) or violating the condition.
    pub worst_pair: Option<(usize, usize)>,
    /// `cw11_gap` at `minimal_m` (the plain subgradient gap when `minimal_m` is 0 or infinite).
    #[serde(with = "crate::serde_ext")]
    pub min_gap_at_m: f64,
    pub lip_g: f64,
    pub gamma: f64,
}

impl CwReport {
    /// Constant used by downstream operations: `minimal_m`, or 1 for constant-gradient data.
    pub fn default_constant(&self) -> Option<f64> {
        if !self.feasible {
            None
        } else if self.minimal_m > 0.0 {
            Some(self.minimal_m)
        } else {
            Some(1.0)
        }
    }
}

/// Computes the infimum of admissible (CW11) constants together with the
/// derived Lipschitz and Le Gruyer quantities.
pub fn minimal_cw11_constant(jet: &Jet) -> Result<CwReport> {
    require_entries(jet, 1)?;
    let e = jet.entries();
    let abs_tol = ABS_REL * (1.0 + jet.value_scale());
    let grad_tol = GRAD_REL * (1.0 + jet.grad_scale());

    let mut sup_ratio = 0.0_f64;
    let mut sup_pair = None;
    let mut negative: Option<((usize, usize), f64)> = None;
    let mut flat: Option<((usize, usize), f64)> = None;

    for (i, j) in ordered_pairs(e.len()) {
        let d = taylor_defect(&e[i], &e[j]);
        let dg = (&e[i].g - &e[j].g).norm();
        if d < -abs_tol {
            if negative.is_none_or(|(_, worst)| d < worst) {
                negative = Some(((i, j), d));
            }
        } else if dg > grad_tol {
            if d <= abs_tol {
                if flat.is_none_or(|(_, worst)| dg > worst) {
                    flat = Some(((i, j), dg));
                }
            } else {
                let ratio = dg * dg / (2.0 * d);
                if ratio > sup_ratio {
                    sup_ratio = ratio;
                    sup_pair = Some((i, j));
                }
            }
        }
    }

    let (lip_g, gamma) = if e.len() >= 2 {
        (lip_gradient(jet)?, legruyer_gamma(jet)?)
    } else {
        (0.0, 0.0)
    };

    if let Some((pair, _)) = negative.or(flat) {
        return Ok(CwReport {
            feasible: false,
            minimal_m: f64::INFINITY,
            worst_pair: Some(pair),
            min_gap_at_m: min_gap(jet, f64::INFINITY),
            lip_g,
            gamma,
        });
    }

    let min_gap_at_m = if sup_ratio > 0.0 {
        min_gap(jet, sup_ratio)
    } else {
        min_gap(jet, f64::INFINITY)
    };
    Ok(CwReport {
        feasible: true,
        minimal_m: sup_ratio,
        worst_pair: sup_pair,
        min_gap_at_m,
        lip_g,
        gamma,
    })
}

/// `max ||G(x) - G(y)|| / ||x - y||` over pairs.
pub fn lip_gradient(jet: &Jet) -> Result<f64> {
    require_entries(jet, 2)?;
    let e = jet.entries();
    let mut best = 0.0_f64;
    for i in 0..e.len() {
        for j in (i + 1)..e.len() {
            best = best.max((&e[i].g - &e[j].g).norm() / (&e[i].x - &e[j].x).norm());
        }
    }
    Ok(best)
}

/// Le Gruyer's functional: sup over pairs of `sqrt(A^2 + B^2) + |A|` with
/// `A = [2(f(x) - f(y)) + <G(x) + G(y), y - x>] / ||x - y||^2` and
/// `B = ||G(x) - G(y)|| / ||x - y||`.
pub fn legruyer_gamma(jet: &Jet) -> Result<f64> {
    require_entries(jet, 2)?;
    let e = jet.entries();
    let mut best = 0.0_f64;
    for i in 0..e.len() {
        for j in (i + 1)..e.len() {
            let (p, q) = (&e[i], &e[j]);
            let dx = &q.x - &p.x;
            let dist2 = dx.norm_squared();
            let a = (2.0 * (p.f - q.f) + (&p.g + &q.g).dot(&dx)) / dist2;
            let b = (&p.g - &q.g).norm() / dist2.sqrt();
            best = best.max(a.hypot(b) + a.abs());
        }
    }
    Ok(best)
}

/// `max |f(x) - f(y) - <G(y), x - y>| / ||x - y||^2` over ordered pairs.
pub fn quadratic_growth_bound(jet: &Jet) -> Result<f64> {
    require_entries(jet, 2)?;
    let e = jet.entries();
    Ok(ordered_pairs(e.len())
        .map(|(i, j)| taylor_defect(&e[i], &e[j]).abs() / (&e[i].x - &e[j].x).norm_squared())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic_1d() -> Jet {
        Jet::from_scalars(&[(0.0, 0.0, 0.0), (1.0, 0.5, 1.0)]).unwrap()
    }

    fn affine_1d() -> Jet {
        Jet::from_scalars(&[(0.0, 3.0, 2.0), (1.0, 5.0, 2.0)]).unwrap()
    }

    fn violating_1d() -> Jet {
        Jet::from_scalars(&[(0.0, 0.0, 0.0), (1.0, -1.0, 0.0)]).unwrap()
    }

    #[test]
    fn gap_examples() {
        assert_eq!(cw11_gap(&quadratic_1d(), 1.0).unwrap(), 0.0);
        for m in [0.1, 1.0, 7.0] {
            assert_eq!(cw11_gap(&affine_1d(), m).unwrap(), 0.0);
        }
        assert_eq!(cw11_gap(&violating_1d(), 1.0).unwrap(), -1.0);
    }

    #[test]
    fn gap_preconditions() {
        let single = Jet::from_scalars(&[(0.0, 0.0, 0.0)]).unwrap();
        assert!(matches!(cw11_gap(&single, 1.0), Err(Error::TooFewEntries { .. })));
        assert!(cw11_gap(&quadratic_1d(), 0.0).is_err());
        assert!(cw11_gap(&quadratic_1d(), f64::NAN).is_err());
    }

    #[test]
    fn minimal_constant_examples() {
        let q = minimal_cw11_constant(&quadratic_1d()).unwrap();
        assert!(q.feasible);
        assert_eq!(q.minimal_m, 1.0);
        assert_eq!(q.min_gap_at_m, 0.0);
        assert_eq!(q.lip_g, 1.0);
        assert_eq!(q.gamma, 1.0);
        assert_eq!(q.default_constant(), Some(1.0));

        let a = minimal_cw11_constant(&affine_1d()).unwrap();
        assert!(a.feasible);
        assert_eq!(a.minimal_m, 0.0);
        assert_eq!(a.worst_pair, None);
        assert_eq!(a.default_constant(), Some(1.0));

        let v = minimal_cw11_constant(&violating_1d()).unwrap();
        assert!(!v.feasible);
        assert!(v.minimal_m.is_infinite());
        assert_eq!(v.worst_pair, Some((1, 0)));
        assert_eq!(v.min_gap_at_m, -1.0);
        assert_eq!(v.default_constant(), None);
    }

    #[test]
    fn tight_defect_with_moving_gradient_is_infeasible() {
        // D(1, 0) = 0 while G changes: no finite M.
        let jet = Jet::from_scalars(&[(0.0, 0.0, 0.0), (1.0, 0.0, 1.0)]).unwrap();
        let r = minimal_cw11_constant(&jet).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.worst_pair, Some((1, 0)));
    }

    #[test]
    fn single_entry_is_trivially_feasible() {
        let jet = Jet::from_scalars(&[(2.0, 1.0, -1.0)]).unwrap();
        let r = minimal_cw11_constant(&jet).unwrap();
        assert!(r.feasible);
        assert_eq!(r.minimal_m, 0.0);
        assert_eq!((r.lip_g, r.gamma), (0.0, 0.0));
    }

    #[test]
    fn lipschitz_gamma_growth_examples() {
        assert_eq!(lip_gradient(&quadratic_1d()).unwrap(), 1.0);
        assert_eq!(lip_gradient(&affine_1d()).unwrap(), 0.0);
        assert_eq!(legruyer_gamma(&quadratic_1d()).unwrap(), 1.0);
        assert_eq!(legruyer_gamma(&affine_1d()).unwrap(), 0.0);
        assert_eq!(quadratic_growth_bound(&quadratic_1d()).unwrap(), 0.5);
        assert_eq!(quadratic_growth_bound(&affine_1d()).unwrap(), 0.0);
    }
}
