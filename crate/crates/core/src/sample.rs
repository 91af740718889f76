//! Smooth convex test functions and seeded samplers for jets and points.
//!
//! Jets sampled from a convex `C^{1,1}` function satisfy (CW11) with the
//! gradient's Lipschitz constant, which makes them the reference inputs for
//! property tests.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::jet::{Jet, JetEntry, Point};

/// A differentiable convex function on `R^d`.
pub trait ConvexFn {
    fn dim(&self) -> usize;
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Point;

    fn entry(&self, x: Point) -> JetEntry {
        let f = self.value(&x);
        let g = self.gradient(&x);
        JetEntry::new(x, f, g)
    }

    /// Jet of `(x, f(x), grad f(x))` at the given points.
    fn sample_jet(&self, points: Vec<Point>) -> Result<Jet> {
        Jet::new(self.dim(), points.into_iter().map(|x| self.entry(x)).collect())
    }
}

/// `f(x) = <A x, x> / 2 + <b, x> + c` with `A` symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl Quadratic {
    /// `|x|^2 / 2`.
    pub fn half_norm_squared(dim: usize) -> Self {
        Quadratic {
            a: DMatrix::identity(dim, dim),
            b: DVector::zeros(dim),
            c: 0.0,
        }
    }

    /// `A = B B^T / rank` with Gaussian `B` of size `dim x rank`; `rank < dim` gives singular `A`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Self {
        let bm = DMatrix::from_fn(dim, rank.max(1), |_, _| gaussian(rng));
        let a = &bm * bm.transpose() / rank.max(1) as f64;
        let b = DVector::from_fn(dim, |_, _| gaussian(rng));
        Quadratic {
            a,
            b,
            c: gaussian(rng),
        }
    }

    pub fn lambda_max(&self) -> f64 {
        SymmetricEigen::new(self.a.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

impl ConvexFn for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &Point) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x) + self.c
    }

    fn gradient(&self, x: &Point) -> Point {
        &self.a * x + &self.b
    }
}

/// `f(x) = log sum_j exp(<a_j, x> + c_j) + mu |x|^2 / 2`.
#[derive(Debug, Clone)]
pub struct LogSumExp {
    pub rows: DMatrix<f64>,
    pub offsets: DVector<f64>,
    pub mu: f64,
}

impl LogSumExp {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, terms: usize, mu: f64) -> Self {
        LogSumExp {
            rows: DMatrix::from_fn(terms, dim, |_, _| gaussian(rng)),
            offsets: DVector::from_fn(terms, |_, _| gaussian(rng)),
            mu,
        }
    }

    fn softmax(&self, x: &Point) -> (f64, DVector<f64>) {
        let z = &self.rows * x + &self.offsets;
        let zmax = z.max();
        let e = z.map(|v| (v - zmax).exp());
        let s = e.sum();
        (zmax + s.ln(), e / s)
    }
}

impl ConvexFn for LogSumExp {
    fn dim(&self) -> usize {
        self.rows.ncols()
    }

    fn value(&self, x: &Point) -> f64 {
        self.softmax(x).0 + 0.5 * self.mu * x.norm_squared()
    }

    fn gradient(&self, x: &Point) -> Point {
        let (_, p) = self.softmax(x);
        self.rows.transpose() * p + x * self.mu
    }
}

/// One standard normal draw.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform point in the ball of the given radius: a normalized Gaussian
/// direction times `radius * U^(1/d)`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Point {
    loop {
        let dir = Point::from_fn(dim, |_, _| gaussian(rng));
        let n = dir.norm();
        if n > 0.0 {
            let u: f64 = rng.random();
            return dir * (radius * u.powf(1.0 / dim as f64) / n);
        }
    }
}

/// `count` uniform points in a ball, redrawing any that land within `min_sep` of an earlier one.
pub fn distinct_points<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    count: usize,
    radius: f64,
    min_sep: f64,
) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::with_capacity(count);
    while pts.len() < count {
        let p = uniform_in_ball(rng, dim, radius);
        if pts.iter().all(|q| (q - &p).norm() >= min_sep) {
            pts.push(p);
        }
    }
    pts
}

/// A random smooth convex function: a PSD quadratic (possibly singular) or a
/// log-sum-exp with a small quadratic term, chosen with equal odds.
pub fn random_convex<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Box<dyn ConvexFn> {
    if rng.random_bool(0.5) {
        let rank = rng.random_range(1..=dim);
        Box::new(Quadratic::random(rng, dim, rank))
    } else {
        let terms = rng.random_range(2..=4);
        let mu = rng.random_range(0.0..0.5);
        Box::new(LogSumExp::random(rng, dim, terms, mu))
    }
}

/// A jet sampled from [`random_convex`] at `count` distinct points of the ball of radius 1.5.
pub fn random_feasible_jet<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Jet {
    let func = random_convex(rng, dim);
    let pts = distinct_points(rng, dim, count, 1.5, 1e-3);
    func.sample_jet(pts).expect("sampled points are distinct and finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn central_difference(f: &dyn ConvexFn, x: &Point, h: f64) -> Point {
        Point::from_fn(x.len(), |i, _| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            (f.value(&xp) - f.value(&xm)) / (2.0 * h)
        })
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = random_convex(&mut rng, 3);
            let x = uniform_in_ball(&mut rng, 3, 1.0);
            let fd = central_difference(f.as_ref(), &x, 1e-6);
            assert!((f.gradient(&x) - fd).norm() < 1e-6);
        }
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            assert!(uniform_in_ball(&mut rng, 5, 2.0).norm() <= 2.0);
        }
        let pts = distinct_points(&mut rng, 2, 30, 1.0, 0.01);
        for i in 0..pts.len() {
            for j in 0..i {
                assert!((&pts[i] - &pts[j]).norm() >= 0.01);
            }
        }
    }

    #[test]
    fn quadratic_lambda_max() {
        let q = Quadratic {
            a: DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
            b: DVector::zeros(2),
            c: 0.0,
        };
        assert!((q.lambda_max() - 3.0).abs() < 1e-12);
    }
}
