use thiserror::Error;

/// Errors produced by the estimation, optimization and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input contains a non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("need at least {min} observations, got {got}")]
    TooFewRows { got: usize, min: usize },

    #[error("need at least 2 predictor columns, got {0}")]
    TooFewCols(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("value outside the domain of {what}: {value}")]
    DomainError { what: &'static str, value: f64 },

    #[error("vector norm {0} cannot be normalized to a unit direction")]
    DegenerateDirection(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("sample covariance is singular or nearly so (eigenvalue ratio {ratio:e})")]
    SingularCovariance { ratio: f64 },

    #[error("slice {slice} has {count} observations, at least 2 are required")]
    EmptySlice { slice: usize, count: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
