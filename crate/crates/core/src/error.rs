use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "calibration domain: aspect ratio n2/n1 = {aspect} lies outside [0.1, 10] \
         (endpoint coordinates must be of comparable size, n1 ≍ n2)"
    )]
    CalibrationDomain { aspect: f64 },

    #[error("unsupported moment order {0} (supported: 0..=8)")]
    UnsupportedOrder(u32),

    #[error("Möbius series needs {needed} terms but the sieve limit is {limit}")]
    SieveLimit { needed: u64, limit: u64 },

    #[error("matrix domain: {0}")]
    MatrixDomain(String),

    #[error("duplicate direction ({0}, {1})")]
    DuplicateDirection(u64, u64),

    #[error("encoding: ({0}, {1}) is not a primitive direction")]
    Encoding(u64, u64),

    #[error("domain: {0}")]
    Domain(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("sampling budget exhausted after {tries} tries")]
    BudgetExhausted { tries: u64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SizeCap(_) | Error::BudgetExhausted { .. } => 3,
            _ => 2,
        }
    }
}
