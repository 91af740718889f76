//! 1-jets: finite sets of `(point, value, gradient)` triples.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::DEDUP_REL;

/// A point (or gradient) in `R^d`.
pub type Point = DVector<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetEntry {
    pub x: Point,
    pub f: f64,
    pub g: Point,
}

impl JetEntry {
    pub fn new(x: Point, f: f64, g: Point) -> Self {
        JetEntry { x, f, g }
    }

    /// Convenience constructor for one-dimensional data.
    pub fn scalar(x: f64, f: f64, g: f64) -> Self {
        JetEntry::new(Point::from_element(1, x), f, Point::from_element(1, g))
    }
}

/// A validated 1-jet: consistent dimension, finite entries, pairwise distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    dim: usize,
    entries: Vec<JetEntry>,
}

impl Jet {
    pub fn new(dim: usize, entries: Vec<JetEntry>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            check_vector(&e.x, dim, &format!("entry {i} point"))?;
            check_vector(&e.g, dim, &format!("entry {i} gradient"))?;
            if !e.f.is_finite() {
                return Err(Error::NonFinite(format!("entry {i} value")));
            }
        }
        let jet = Jet { dim, entries };
        let eps = jet.dedup_eps();
        for i in 0..jet.entries.len() {
            for j in (i + 1)..jet.entries.len() {
                if (&jet.entries[i].x - &jet.entries[j].x).norm() < eps {
                    return Err(Error::DuplicatePoint {
                        first: i,
                        second: j,
                        eps,
                    });
                }
            }
        }
        Ok(jet)
    }

    /// Builds a one-dimensional jet from `(x, f, g)` triples.
    pub fn from_scalars(data: &[(f64, f64, f64)]) -> Result<Self> {
        Jet::new(
            1,
            data.iter()
                .map(|&(x, f, g)| JetEntry::scalar(x, f, g))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[JetEntry] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &JetEntry {
        &self.entries[i]
    }

    pub fn into_entries(self) -> Vec<JetEntry> {
        self.entries
    }

    /// Largest absolute coordinate over all points.
    pub fn coord_scale(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| e.x.iter())
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Largest gradient norm.
    pub fn grad_scale(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, e| m.max(e.g.norm()))
    }

    /// Magnitude of the terms `f(x) - f(y) - <G(y), x - y>`: `max |f| + max ||G|| * max ||x||`.
    pub fn value_scale(&self) -> f64 {
        let fmax = self.entries.iter().fold(0.0_f64, |m, e| m.max(e.f.abs()));
        let xmax = self.entries.iter().fold(0.0_f64, |m, e| m.max(e.x.norm()));
        fmax + self.grad_scale() * xmax
    }

    pub fn dedup_eps(&self) -> f64 {
        DEDUP_REL * (1.0 + self.coord_scale())
    }

    /// Index of an entry within `dedup_eps` of `x`, if any.
    pub fn find_point(&self, x: &Point) -> Option<usize> {
        let eps = self.dedup_eps().max(DEDUP_REL * (1.0 + x.amax()));
        self.entries.iter().position(|e| (&e.x - x).norm() < eps)
    }

    /// Returns a new jet with `entry` appended, re-checking the invariants.
    pub fn augmented(&self, entry: JetEntry) -> Result<Jet> {
        let mut entries = self.entries.clone();
        entries.push(entry);
        Jet::new(self.dim, entries)
    }

    pub(crate) fn check_point(&self, x: &Point, what: &str) -> Result<()> {
        check_vector(x, self.dim, what)
    }
}

pub(crate) fn check_vector(v: &Point, dim: usize, what: &str) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            what: what.to_string(),
            expected: dim,
            found: v.len(),
        });
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite(what.to_string()));
    }
    Ok(())
}
