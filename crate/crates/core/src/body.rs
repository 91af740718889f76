//! Checker for sets interpolable by boundaries of `C^{1,1}` convex bodies with
//! prescribed outer unit normals.
//!
//! Given points `C` and unit normals `N`, two margins are reported:
//!
//! ```text
//! delta_O  = min_y <N(y), y>
//! delta_KW = inf over pairs with N(x) != N(y) of <N(y), y - x> / |N(y) - N(x)|^2
//! ```
//!
//! A body exists (with the origin in its interior) iff both are positive and
//! every pair with equal normals has `<N(y), y - x> >= 0`. Only the check is
//! implemented; constructing the body is out of scope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{check_vector, Point};
use crate::tolerance::{ABS_REL, GRAD_REL, UNIT_NORMAL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyData {
    dim: usize,
    points: Vec<Point>,
    normals: Vec<Point>,
}

impl BodyData {
    /// Validates dimensions, finiteness and `| |N(y)| - 1 | <= 1e-12`.
    pub fn new(dim: usize, points: Vec<Point>, normals: Vec<Point>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if points.is_empty() {
            return Err(Error::TooFewEntries { needed: 1, found: 0 });
        }
        if points.len() != normals.len() {
            return Err(Error::DimensionMismatch {
                what: "normal list".into(),
                expected: points.len(),
                found: normals.len(),
            });
        }
        for (i, (y, n)) in points.iter().zip(&normals).enumerate() {
            check_vector(y, dim, &format!("point {i}"))?;
            check_vector(n, dim, &format!("normal {i}"))?;
            let norm = n.norm();
            if (norm - 1.0).abs() > UNIT_NORMAL {
                return Err(Error::NonUnitNormal { index: i, norm });
            }
        }
        Ok(BodyData { dim, points, normals })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn normals(&self) -> &[Point] {
        &self.normals
    }

    /// Keeps only the listed indices.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let points = idx.iter().map(|&i| self.points[i].clone()).collect();
        let normals = idx.iter().map(|&i| self.normals[i].clone()).collect();
        BodyData::new(self.dim, points, normals)
    }

    fn side_tol(&self) -> f64 {
        let scale = self.points.iter().fold(0.0_f64, |m, y| m.max(y.norm()));
        ABS_REL * (1.0 + scale)
    }
}

/// Result of [`check_kw11`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kw11Report {
    /// `+inf` when no pair has distinct normals.
    #[serde(with = "crate::serde_ext")]
    pub delta_kw: f64,
    /// Ordered pair `(y, x)` attaining `delta_kw`.
    pub worst_pair: Option<(usize, usize)>,
    /// `min <N(y), y - x>` over ordered pairs with equal normals (`+inf` if none).
    #[serde(with = "crate::serde_ext")]
    pub equal_normal_min: f64,
    pub equal_normal_pair: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyReport {
    pub delta_o: f64,
    /// Point attaining `delta_o`.
    pub outer_witness: usize,
    pub kw: Kw11Report,
    /// Tolerance used for the equal-normal side condition.
    pub side_tol: f64,
    pub feasible: bool,
}

/// `min_y <N(y), y>`: the largest `delta` for the outer condition.
pub fn check_outer(body: &BodyData) -> Result<f64> {
    Ok(outer_min(body).0)
}

fn outer_min(body: &BodyData) -> (f64, usize) {
    body.points
        .iter()
        .zip(&body.normals)
        .map(|(y, n)| n.dot(y))
        .enumerate()
        .fold((f64::INFINITY, 0), |best, (i, v)| if v < best.0 { (v, i) } else { best })
}

/// Infimum of `<N(y), y - x> / |N(y) - N(x)|^2` over ordered pairs with
/// distinct normals, plus the equal-normal side witness.
pub fn check_kw11(body: &BodyData) -> Result<Kw11Report> {
    if body.len() < 2 {
        return Err(Error::TooFewEntries {
            needed: 2,
            found: body.len(),
        });
    }
    Ok(kw11_scan(body))
}

fn kw11_scan(body: &BodyData) -> Kw11Report {
    let normal_tol = GRAD_REL * 2.0;
    let mut report = Kw11Report {
        delta_kw: f64::INFINITY,
        worst_pair: None,
        equal_normal_min: f64::INFINITY,
        equal_normal_pair: None,
    };
    let (c, n) = (&body.points, &body.normals);
    for y in 0..c.len() {
        for x in 0..c.len() {
            if x == y {
                continue;
            }
            let lhs = n[y].dot(&(&c[y] - &c[x]));
            let dn = (&n[y] - &n[x]).norm();
            if dn > normal_tol {
                let ratio = lhs / (dn * dn);
                if ratio < report.delta_kw {
                    report.delta_kw = ratio;
                    report.worst_pair = Some((y, x));
                }
            } else if lhs < report.equal_normal_min {
                report.equal_normal_min = lhs;
                report.equal_normal_pair = Some((y, x));
            }
        }
    }
    report
}

/// Both conditions at once. Single-point bodies are allowed; then `delta_kw = +inf`.
pub fn check_body(body: &BodyData) -> Result<BodyReport> {
    let (delta_o, outer_witness) = outer_min(body);
    let kw = kw11_scan(body);
    let side_tol = body.side_tol();
    let feasible = delta_o.min(kw.delta_kw) > 0.0 && kw.equal_normal_min >= -side_tol;
    Ok(BodyReport {
        delta_o,
        outer_witness,
        kw,
        side_tol,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(count: usize, radius: f64) -> BodyData {
        let mut pts = Vec::new();
        let mut nrm = Vec::new();
        for i in 0..count {
            let t = 2.0 * PI * i as f64 / count as f64;
            let u = Point::from_vec(vec![t.cos(), t.sin()]);
            pts.push(&u * radius);
            nrm.push(u);
        }
        BodyData::new(2, pts, nrm).unwrap()
    }

    #[test]
    fn unit_circle_margins() {
        let body = circle(16, 1.0);
        assert!((check_outer(&body).unwrap() - 1.0).abs() < 1e-12);
        let kw = check_kw11(&body).unwrap();
        assert!((kw.delta_kw - 0.5).abs() < 1e-12);
        assert!(kw.equal_normal_min.is_infinite());
        assert!(check_body(&body).unwrap().feasible);
    }

    #[test]
    fn scaled_circle_outer_margin() {
        assert!((check_outer(&circle(16, 2.0)).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn antipodal_points_with_shared_normal() {
        let e1 = Point::from_vec(vec![1.0, 0.0]);
        let body = BodyData::new(2, vec![e1.clone(), -&e1], vec![e1.clone(), e1.clone()]).unwrap();
        assert_eq!(check_outer(&body).unwrap(), -1.0);
        let kw = check_kw11(&body).unwrap();
        assert!(kw.delta_kw.is_infinite());
        assert_eq!(kw.equal_normal_min, -2.0);
        assert_eq!(kw.equal_normal_pair, Some((1, 0)));
        assert!(!check_body(&body).unwrap().feasible);
    }

    #[test]
    fn single_point_only_outer_binds() {
        let y = Point::from_vec(vec![2.0, 0.0]);
        let body = BodyData::new(2, vec![y], vec![Point::from_vec(vec![1.0, 0.0])]).unwrap();
        assert!(matches!(check_kw11(&body), Err(Error::TooFewEntries { .. })));
        let rep = check_body(&body).unwrap();
        assert_eq!(rep.delta_o, 2.0);
        assert!(rep.kw.delta_kw.is_infinite());
        assert!(rep.feasible);
    }

    #[test]
    fn rejects_non_unit_normal() {
        let r = BodyData::new(
            2,
            vec![Point::from_vec(vec![1.0, 0.0])],
            vec![Point::from_vec(vec![1.0, 1e-5])],
        );
        assert!(matches!(r, Err(Error::NonUnitNormal { index: 0, .. })));
    }
}
