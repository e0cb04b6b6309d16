use thiserror::Error;

use crate::grid::Cell;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("intervals overlap: [{a}, {b}] and [{c}, {d}]")]
    OverlappingIntervals { a: f64, b: f64, c: f64, d: f64 },

    #[error("cell sets are not disjoint (shared cell {0:?})")]
    NotDisjoint(Cell),

    #[error("cell {0:?} is not on the discrete boundary of E")]
    NotOnBoundary(Cell),

    #[error("cell {0:?} lies outside the domain")]
    OutsideDomain(Cell),

    #[error("infeasible constraint set at boundary cell {0:?}")]
    Infeasible(Cell),

    #[error("linear solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),

    #[error("test field violates its support constraint at cell {0:?}")]
    SupportViolation(Cell),

    #[error("perturbation set is not contained in E at cell {0:?}")]
    NotContained(Cell),

    #[error("Poisson kernel normalization off by {0:e}")]
    Normalization(f64),

    #[error("region exceeds the extension mesh: {0}")]
    RegionTooLarge(String),

    #[error("calibration spread {spread:.4} exceeds the 5% bound (c_hat = {c_hat:.6})")]
    CalibrationSpread { spread: f64, c_hat: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("flatness undefined: no boundary points in the ball")]
    EmptyBoundary,

    #[error("cell {0:?} is outside the flip scope")]
    OutOfScope(Cell),

    #[error("format error at line {line}: {reason}")]
    Format { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FracError {
    fn from(e: std::io::Error) -> Self {
        FracError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FracError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> FracError {
    FracError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
