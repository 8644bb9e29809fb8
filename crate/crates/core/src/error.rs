//! Error type shared across the library.

use thiserror::Error;

/// Errors raised by schedule construction, field operations and solvers.
#[derive(Debug, Error)]
pub enum CascadeError {
    /// A numeric parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A box-lattice level does not align with the requested grid.
    #[error("level {level} does not align with the 2^{q} x 2^{q} grid")]
    MisalignedLevel { level: u32, q: u32 },

    /// Two fields (or a field and an operator) live on different grids.
    #[error("grid mismatch: expected 2^{expected}, got 2^{got}")]
    GridMismatch { expected: u32, got: u32 },

    /// Not enough (or degenerate) data for a fit or statistic.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// File input/output failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A serialized event line could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CascadeError>;
