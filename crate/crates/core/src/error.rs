use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("image is not mean-zero (sum {sum:e})")]
    NotMeanZero { sum: f64 },

    #[error("degenerate polytope: {0}")]
    DegeneratePolytope(String),

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: &'static str },

    #[error("infeasible starting point: sup norm {norm} exceeds 1")]
    InfeasibleStart { norm: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no witness: {0}")]
    NoWitness(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
