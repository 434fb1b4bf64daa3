use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which admissible prime set ran short during a scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeKind {
    Pi,
    Omega,
}

impl std::fmt::Display for PrimeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PrimeKind::Pi => f.write_str("Pi"),
            PrimeKind::Omega => f.write_str("Omega"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("validation error at line {line}: {message}")]
    Validation { line: u64, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no coefficient available for prime {ell}")]
    Coverage { ell: u64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error(
        "not enough {kind} primes below {scanned_to}: needed {needed}, found {found} \
         (expected supply rate {expected_rate})"
    )]
    Scarcity {
        kind: PrimeKind,
        needed: usize,
        found: usize,
        scanned_to: u64,
        expected_rate: String,
    },

    #[error("level {level} is not a multiple of N_g = {base_level}")]
    NotMultipleOfLevel { level: u64, base_level: u64 },

    #[error("could not factor {0} by trial division within the configured bound")]
    Unfactorable(u64),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
