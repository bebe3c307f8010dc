use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-contract input data.
    #[error("input error: {0}")]
    Input(String),

    #[error("dimension mismatch: x has p = {x}, y has p = {y}")]
    Dimension { x: usize, y: usize },

    /// The variance estimate for entry (i, j) is zero or not finite.
    /// Indices are zero-based.
    #[error("degenerate variance estimate at entry ({i}, {j})")]
    DegenerateVariance { i: usize, j: usize },

    /// A function argument lies outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// True for failures that come from the numerics rather than from
    /// the caller's inputs or parameters.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_) | Error::DegenerateVariance { .. })
    }
}
