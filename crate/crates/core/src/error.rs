use thiserror::Error;

/// Errors raised by the lattice, channel and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field size {0} is not prime")]
    NotPrime(u64),
    #[error("generator vector is all-zero modulo q")]
    ZeroGenerator,
    #[error("target power must be positive and finite, got {0}")]
    NonPositivePower(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is not a fine-lattice point")]
    NotFinePoint,
    #[error("metric is not positive definite")]
    NotPositiveDefinite,
    #[error("block size {0} is not supported by the exact block search (max 4)")]
    UnsupportedBlockSize(usize),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("coherence length {b} does not divide sequence length {n}")]
    CoherenceMismatch { n: usize, b: usize },
    #[error("composition n*p = {0} is not an integer")]
    NonIntegralComposition(f64),
    #[error("value {0} is outside the distribution support")]
    OutOfSupport(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical integration did not converge on [{lo}, {hi}]")]
    IntegrationFailed { lo: f64, hi: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
