//! JSON documents for jets, bodies and query lists.
//!
//! The canonical text form is `serde_json`'s pretty printer (two-space indent,
//! shortest round-trip floats) plus a trailing newline, so parsing a canonical
//! file and writing it back reproduces it byte for byte.

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::body::BodyData;
use crate::error::{Error, Result};
use crate::jet::{Jet, JetEntry, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetRecord {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
}

/// `{ "dim": d, "points": [ { "x": [...], "f": v, "g": [...] } ] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetFile {
    pub dim: usize,
    pub points: Vec<JetRecord>,
}

impl JetFile {
    pub fn from_jet(jet: &Jet) -> Self {
        JetFile {
            dim: jet.dim(),
            points: jet
                .entries()
                .iter()
                .map(|e| JetRecord {
                    x: e.x.iter().copied().collect(),
                    f: e.f,
                    g: e.g.iter().copied().collect(),
                })
                .collect(),
        }
    }

    /// Validates against the jet invariants; errors name the offending entry.
    pub fn to_jet(&self) -> Result<Jet> {
        let entries = self
            .points
            .iter()
            .map(|r| JetEntry::new(Point::from_column_slice(&r.x), r.f, Point::from_column_slice(&r.g)))
            .collect();
        Jet::new(self.dim, entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyRecord {
    pub y: Vec<f64>,
    pub n: Vec<f64>,
}

/// `{ "dim": d, "points": [ { "y": [...], "n": [...] } ] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyFile {
    pub dim: usize,
    pub points: Vec<BodyRecord>,
}

impl BodyFile {
    pub fn from_body(body: &BodyData) -> Self {
        BodyFile {
            dim: body.dim(),
            points: body
                .points()
                .iter()
                .zip(body.normals())
                .map(|(y, n)| BodyRecord {
                    y: y.iter().copied().collect(),
                    n: n.iter().copied().collect(),
                })
                .collect(),
        }
    }

    pub fn to_body(&self) -> Result<BodyData> {
        let (ys, ns) = self
            .points
            .iter()
            .map(|r| (Point::from_column_slice(&r.y), Point::from_column_slice(&r.n)))
            .unzip();
        BodyData::new(self.dim, ys, ns)
    }
}

/// `{ "dim": d, "queries": [[...], ...] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueriesFile {
    pub dim: usize,
    pub queries: Vec<Vec<f64>>,
}

impl QueriesFile {
    pub fn from_points(dim: usize, points: &[Point]) -> Self {
        QueriesFile {
            dim,
            queries: points.iter().map(|p| p.iter().copied().collect()).collect(),
        }
    }

    pub fn to_points(&self) -> Result<Vec<Point>> {
        self.queries
            .iter()
            .enumerate()
            .map(|(i, q)| {
                if q.len() != self.dim {
                    return Err(Error::DimensionMismatch {
                        what: format!("query {i}"),
                        expected: self.dim,
                        found: q.len(),
                    });
                }
                if q.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(format!("query {i}")));
                }
                Ok(Point::from_column_slice(q))
            })
            .collect()
    }
}

/// Parses a JSON document; syntax errors carry serde_json's line and column.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Canonical text form: pretty JSON with a trailing newline.
pub fn to_canonical<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_jet(text: &str) -> Result<Jet> {
    parse::<JetFile>(text)?.to_jet()
}

pub fn parse_body(text: &str) -> Result<BodyData> {
    parse::<BodyFile>(text)?.to_body()
}

/// Returns the declared dimension and the query points.
pub fn parse_queries(text: &str) -> Result<(usize, Vec<Point>)> {
    let file: QueriesFile = parse(text)?;
    Ok((file.dim, file.to_points()?))
}

pub fn jet_to_string(jet: &Jet) -> Result<String> {
    to_canonical(&JetFile::from_jet(jet))
}
