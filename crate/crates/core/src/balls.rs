//! Pairwise balls at a query point.
//!
//! For an ordered pair `(a, b)` of jet entries and a query `x`, the admissible
//! gradients `G(x)` for the two-sided (CW11) constraints against `(a, b)` form
//! the closed ball with
//!
//! ```text
//! alpha = M (f(b) - f(a) - <G(a), b - a>) - |G(a) - G(b)|^2 / 2
//! beta  = |(G(b) - G(a) + M (x - b)) / 2|^2
//! Z     = (G(a) + G(b) + M (x - b)) / 2,     r = sqrt(alpha + beta)
//! ```
//!
//! A candidate gradient `z` satisfies `s(x; z) <= I(x; z)` iff it lies in every ball.

use serde::{Deserialize, Serialize};

use crate::cw::taylor_defect;
use crate::error::{Error, Result};
use crate::jet::{Jet, Point};
use crate::tolerance::FEAS_REL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairBall {
    pub a_idx: usize,
    pub b_idx: usize,
    pub alpha: f64,
    pub beta: f64,
    pub center: Point,
    pub radius: f64,
}

/// `gamma1(a) = G(a)` and `gamma2(a) = G(a) + M (x - a)` for one jet entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaPair {
    pub gamma1: Point,
    pub gamma2: Point,
}

fn check_query(jet: &Jet, m: f64, x: &Point) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "M must be positive and finite, got {m}"
        )));
    }
    if jet.is_empty() {
        return Err(Error::TooFewEntries { needed: 1, found: 0 });
    }
    jet.check_point(x, "query point")
}

/// One ball per ordered pair of `E^2` (diagonal included), in lexicographic
/// order of `(a_idx, b_idx)`: ball `(a, b)` sits at index `a * n + b`.
pub fn pair_balls(jet: &Jet, m: f64, x: &Point) -> Result<Vec<PairBall>> {
    check_query(jet, m, x)?;
    if let Some(entry) = jet.find_point(x) {
        return Err(Error::QueryCoincidesWithData { entry });
    }
    let alpha_tol = m * FEAS_REL * (1.0 + jet.value_scale());
    let e = jet.entries();
    let mut balls = Vec::with_capacity(e.len() * e.len());
    for (a, ea) in e.iter().enumerate() {
        for (b, eb) in e.iter().enumerate() {
            let mut alpha = if a == b {
                0.0
            } else {
                m * taylor_defect(eb, ea) - 0.5 * (&ea.g - &eb.g).norm_squared()
            };
            if alpha < 0.0 {
                if alpha < -alpha_tol {
                    return Err(Error::NotCw11 { m, a, b, alpha });
                }
                alpha = 0.0;
            }
            let shift = (x - &eb.x) * m;
            let half_gap = (&eb.g - &ea.g + &shift) * 0.5;
            let center = (&ea.g + &eb.g + &shift) * 0.5;
            let beta = half_gap.norm_squared();
            balls.push(PairBall {
                a_idx: a,
                b_idx: b,
                alpha,
                beta,
                center,
                radius: (alpha + beta).sqrt(),
            });
        }
    }
    Ok(balls)
}

/// `gamma1` and `gamma2` for every jet entry, indexed like the jet.
pub fn gamma_pairs(jet: &Jet, m: f64, x: &Point) -> Result<Vec<GammaPair>> {
    check_query(jet, m, x)?;
    Ok(jet
        .entries()
        .iter()
        .map(|e| GammaPair {
            gamma1: e.g.clone(),
            gamma2: &e.g + (x - &e.x) * m,
        })
        .collect())
}

/// `max_i (||z - center_i||^2 - radius_i^2)`; nonpositive iff `z` lies in every ball.
pub fn membership_margin(balls: &[PairBall], z: &Point) -> Result<f64> {
    if balls.is_empty() {
        return Err(Error::TooFewEntries { needed: 1, found: 0 });
    }
    let mut worst = f64::NEG_INFINITY;
    for ball in balls {
        if ball.center.len() != z.len() {
            return Err(Error::DimensionMismatch {
                what: "candidate gradient".into(),
                expected: ball.center.len(),
                found: z.len(),
            });
        }
        worst = worst.max((z - &ball.center).norm_squared() - ball.radius * ball.radius);
    }
    Ok(worst)
}

/// `Phi((a,b),(c,d)) + <gamma1(a), gamma2(d)> + <gamma1(c), gamma2(b)>`, where
/// `Phi((a,b),(c,d)) = r_ab^2 + r_cd^2 - ||Z_ab||^2 - ||Z_cd||^2`.
///
/// Algebraically this equals `alpha_ad + alpha_cb`, hence is nonnegative for
/// (CW11) data.
pub fn phi_diagnostic(
    balls: &[PairBall],
    gammas: &[GammaPair],
    pair1: (usize, usize),
    pair2: (usize, usize),
) -> Result<f64> {
    let n = gammas.len();
    if balls.len() != n * n {
        return Err(Error::DimensionMismatch {
            what: "ball list".into(),
            expected: n * n,
            found: balls.len(),
        });
    }
    let (a, b) = pair1;
    let (c, d) = pair2;
    if [a, b, c, d].iter().any(|&i| i >= n) {
        return Err(Error::InvalidParameter(format!(
            "pair index out of range for {n} entries"
        )));
    }
    let ab = &balls[a * n + b];
    let cd = &balls[c * n + d];
    let phi = ab.radius * ab.radius + cd.radius * cd.radius
        - ab.center.norm_squared()
        - cd.center.norm_squared();
    Ok(phi + gammas[a].gamma1.dot(&gammas[d].gamma2) + gammas[c].gamma1.dot(&gammas[b].gamma2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetEntry;

    fn quadratic_1d() -> Jet {
        Jet::from_scalars(&[(0.0, 0.0, 0.0), (1.0, 0.5, 1.0)]).unwrap()
    }

    fn p1(v: f64) -> Point {
        Point::from_element(1, v)
    }

    #[test]
    fn quadratic_example_balls() {
        let balls = pair_balls(&quadratic_1d(), 1.0, &p1(0.5)).unwrap();
        let expect = [((0, 0), 0.25), ((0, 1), 0.25), ((1, 0), 0.75), ((1, 1), 0.75)];
        assert_eq!(balls.len(), 4);
        for (ball, ((a, b), z)) in balls.iter().zip(expect) {
            assert_eq!((ball.a_idx, ball.b_idx), (a, b));
            assert_eq!(ball.alpha, 0.0);
            assert_eq!(ball.beta, 0.0625);
            assert_eq!(ball.center[0], z);
            assert_eq!(ball.radius, 0.25);
        }
    }

    #[test]
    fn single_entry_ball() {
        let jet = Jet::new(
            2,
            vec![JetEntry::new(Point::from_vec(vec![1.0, -1.0]), 2.0, Point::from_vec(vec![0.5, 0.0]))],
        )
        .unwrap();
        let x = Point::from_vec(vec![3.0, 1.0]);
        let m = 2.0;
        let balls = pair_balls(&jet, m, &x).unwrap();
        assert_eq!(balls.len(), 1);
        let expected_center = Point::from_vec(vec![0.5 + 2.0, 2.0]);
        assert!((&balls[0].center - expected_center).norm() < 1e-15);
        assert!((balls[0].radius - (m / 2.0) * 8.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn affine_balls_contain_constant_gradient() {
        let jet = Jet::from_scalars(&[(0.0, 3.0, 2.0), (1.0, 5.0, 2.0)]).unwrap();
        for x in [-3.0, 0.4, 2.5] {
            let balls = pair_balls(&jet, 1.0, &p1(x)).unwrap();
            for ball in &balls {
                let eb = jet.entry(ball.b_idx);
                assert!(((p1(2.0) - &ball.center).norm() - 0.5 * (x - eb.x[0]).abs()).abs() < 1e-14);
                assert!((ball.radius - 0.5 * (x - eb.x[0]).abs()).abs() < 1e-14);
            }
            assert!(membership_margin(&balls, &p1(2.0)).unwrap() <= 1e-14);
        }
    }

    #[test]
    fn margin_examples() {
        let balls = pair_balls(&quadratic_1d(), 1.0, &p1(0.5)).unwrap();
        assert_eq!(membership_margin(&balls, &p1(0.5)).unwrap(), 0.0);
        let m = membership_margin(&balls, &p1(0.4)).unwrap();
        assert!((m - 0.06).abs() < 1e-15);
        assert!(membership_margin(&[], &p1(0.0)).is_err());
        assert!(membership_margin(&balls, &Point::zeros(2)).is_err());
    }

    #[test]
    fn rejects_query_on_data_and_infeasible_constant() {
        assert!(matches!(
            pair_balls(&quadratic_1d(), 1.0, &p1(1.0)),
            Err(Error::QueryCoincidesWithData { entry: 1 })
        ));
        // the quadratic jet is not (CW11) for M < 1
        assert!(matches!(
            pair_balls(&quadratic_1d(), 0.5, &p1(0.5)),
            Err(Error::NotCw11 { .. })
        ));
    }

    #[test]
    fn singleton_fixture_has_zero_radius() {
        let jet = Jet::from_scalars(&[(0.0, 0.0, 0.0), (2.0, 1.5, 1.0)]).unwrap();
        let balls = pair_balls(&jet, 1.0, &p1(1.0)).unwrap();
        let b = &balls[2]; // (a, b) = (entry at 2, entry at 0)
        assert_eq!((b.a_idx, b.b_idx), (1, 0));
        assert_eq!((b.alpha, b.beta, b.radius), (0.0, 0.0, 0.0));
        assert_eq!(b.center[0], 1.0);
    }

    #[test]
    fn phi_equals_alpha_cross_terms() {
        let jet = Jet::from_scalars(&[(0.0, 0.0, 0.0), (1.0, 0.5, 1.0), (-2.0, 2.0, -2.0)]).unwrap();
        let x = p1(0.3);
        let balls = pair_balls(&jet, 1.0, &x).unwrap();
        let gammas = gamma_pairs(&jet, 1.0, &x).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let z = &balls[a * 3 + b].center;
                assert!((&gammas[a].gamma1 + &gammas[b].gamma2 - z * 2.0).norm() < 1e-14);
                for c in 0..3 {
                    for d in 0..3 {
                        let v = phi_diagnostic(&balls, &gammas, (a, b), (c, d)).unwrap();
                        let expected = balls[a * 3 + d].alpha + balls[c * 3 + b].alpha;
                        assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
                    }
                }
            }
        }
        assert!(phi_diagnostic(&balls, &gammas, (0, 3), (0, 0)).is_err());
    }
}
