use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid word: map index {index} out of range 1..={len}")]
    InvalidWord { index: usize, len: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("capacity exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: usize,
        limit: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("base table does not cover (0, {needed}]; it stops at {covered}")]
    IncompleteBase { needed: f64, covered: f64 },
    #[error("renewal error term inconsistent at x = {x}: {reason}")]
    Inconsistent { x: f64, reason: String },
    #[error("not delta-disjoint: {0}")]
    NotDeltaDisjoint(String),
    #[error("not a fractal string: {0}")]
    NotAString(String),
    #[error("string truncated after {count} terms (partial count {partial})")]
    Truncated { count: usize, partial: u64 },
    #[error("evaluation at {s} is within {distance:e} of the pole {pole}")]
    PoleProximity {
        s: Complex64,
        pole: Complex64,
        distance: f64,
    },
    #[error("{s} lies outside the half-plane Re(s) > {sigma0} where the error transform converges")]
    Domain { s: Complex64, sigma0: f64 },
    #[error("pole at {0} is not simple")]
    NotSimple(Complex64),
    #[error("removable singularity at {0}: numerator vanishes")]
    Removable(Complex64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("not measurable: {0}")]
    NotMeasurable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
