use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The input is malformed or violates a structural invariant.
    Malformed,
    /// The input is well formed but the data does not satisfy the required condition.
    Infeasible,
    /// A numerical certificate or internal consistency check failed.
    Certificate,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("entries {first} and {second} are closer than the duplicate threshold {eps:e}")]
    DuplicatePoint { first: usize, second: usize, eps: f64 },
    #[error("need at least {needed} entries, found {found}")]
    TooFewEntries { needed: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("query point coincides with jet entry {entry}")]
    QueryCoincidesWithData { entry: usize },
    #[error("jet is not (CW11) at M = {m}: pair ({a}, {b}) has alpha = {alpha:e}")]
    NotCw11 { m: f64, a: usize, b: usize, alpha: f64 },
    #[error("minimax certificate failed: lambda0 = {lambda0} exceeds 1 + {slack:e}")]
    CertificateFailure { lambda0: f64, slack: f64 },
    #[error("minimax solver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("singleton ball at pair {pair} is not contained in the intersection (margin {margin:e})")]
    SingletonOutside { pair: usize, margin: f64 },
    #[error("bracket inversion: s = {s}, I = {i}")]
    BracketInversion { s: f64, i: f64 },
    #[error("augmented jet fails (CW11) at M = {m}: gap {gap:e}")]
    Inconsistent { m: f64, gap: f64 },
    #[error("normal {index} is not a unit vector (norm {norm})")]
    NonUnitNormal { index: usize, norm: f64 },
    #[error("point outside the domain ||x|| < 2 (norm {norm})")]
    DomainViolation { norm: f64 },
    #[error("step {index}: {source}")]
    AtStep {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn at_step(index: usize, source: Error) -> Self {
        Error::AtStep {
            index,
            source: Box::new(source),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotCw11 { .. } => ErrorClass::Infeasible,
            Error::CertificateFailure { .. }
            | Error::NoConvergence { .. }
            | Error::SingletonOutside { .. }
            | Error::BracketInversion { .. }
            | Error::Inconsistent { .. } => ErrorClass::Certificate,
            Error::AtStep { source, .. } => source.class(),
            _ => ErrorClass::Malformed,
        }
    }
}
