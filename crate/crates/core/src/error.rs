use thiserror::Error;

/// Errors raised by field construction, operators and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("dyadic index {j} outside admissible range [{j_min}, {j_max}]")]
    BlockOutOfRange { j: i32, j_min: i32, j_max: i32 },

    #[error("field has nonzero mean {mean:e}; homogeneous quantities require mean-zero data")]
    NonZeroMean { mean: f64 },

    #[error("velocity field is not divergence-free (max |xi . u_hat| = {residual:e})")]
    NotSolenoidal { residual: f64 },

    #[error("band limit {k_max} exceeds what the grid resolves ({limit})")]
    BandLimit { k_max: f64, limit: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
