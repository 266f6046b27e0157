use thiserror::Error;

/// Errors raised by the analysis, simulation and model layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not skew-Hermitian (relative residual {residual:.3e})")]
    NotSkewHermitian { residual: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("Lie closure did not converge within {max_rounds} rounds (dimension {dim})")]
    NotConverged { max_rounds: usize, dim: usize },

    #[error("bracket table is not antisymmetric at ({i}, {j})")]
    NotAntisymmetric { i: usize, j: usize },

    #[error("invalid bracket table: {0}")]
    InvalidTable(String),

    #[error("invalid value set: {0}")]
    InvalidValueSet(String),

    #[error("invalid functional family: {0}")]
    InvalidFamily(String),

    #[error("control value {0} is not a point of the value set")]
    OffGrid(f64),

    #[error("invalid control segment {index}: {reason}")]
    InvalidSegment { index: usize, reason: String },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    /// True for failures of the cross-checks between independent routes.
    pub fn is_consistency(&self) -> bool {
        matches!(self, Error::Consistency(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
