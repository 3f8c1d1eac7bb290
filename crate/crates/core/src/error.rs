use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report. Variants carry enough context to
/// attribute a failure to a point or an input without a backtrace.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("coordinate index {index} out of range for a chart of dimension {dim}")]
    CoordOutOfRange { index: usize, dim: usize },

    #[error("division by zero at the evaluation point")]
    DivisionByZero,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("rank mismatch: expected ({expected_upper},{expected_lower}), got ({upper},{lower})")]
    RankMismatch {
        expected_upper: usize,
        expected_lower: usize,
        upper: usize,
        lower: usize,
    },

    #[error("jet order exhausted: {operation} needs order >= {needed}, have {available}")]
    InsufficientJetOrder {
        operation: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("tensor is not antisymmetric (residual {residual:.3e})")]
    NotAntisymmetric { residual: f64 },

    #[error("metric is singular at the point (|det| = {det:.3e})")]
    SingularMetric { det: f64 },

    #[error("connection has torsion (residual {residual:.3e})")]
    NotTorsionless { residual: f64 },

    #[error("distribution T{sign} is not integrable (Nijenhuis residual {residual:.3e})")]
    NotIntegrable { sign: char, residual: f64 },

    #[error("base structure is not para-Kahler (residual {residual:.3e})")]
    NotParaKahler { residual: f64 },

    #[error("two-form has the wrong type: {0}")]
    WrongType(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("frame is singular at the point (|det| = {det:.3e})")]
    SingularFrame { det: f64 },

    #[error("chart has no (+/-) coordinate split")]
    MissingSplit,

    #[error("base metric is not positive definite at the point")]
    NotPositiveDefinite,

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("spec error at {location}: {message}")]
    SpecParse { location: String, message: String },
}
