use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("policy action {action:?} lies outside the action set of state {state}")]
    MembershipViolation { state: String, action: Vec<f64> },

    #[error("rejection budget exhausted after {attempts} attempts (last reason: {reason})")]
    RejectionBudgetExceeded { attempts: usize, reason: String },

    #[error("certification failed: {0}")]
    CertificationFailed(String),

    #[error(
        "closed-form and dynamic-programming optimal values disagree at state {state}: \
         {closed} vs {dp} (|diff| = {diff:e})"
    )]
    OracleDisagreement {
        state: String,
        closed: f64,
        dp: f64,
        diff: f64,
    },

    #[error("invalid call: {0}")]
    InvalidCall(String),

    #[error("outer loop exceeded its iteration bound of {bound}; this signals a bug")]
    IterationBoundExceeded { bound: usize },

    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Process exit code for the CLI: 1 = configuration error, 2 = certification
    /// failure, 3 = internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_)
            | Error::Json { .. }
            | Error::Io { .. }
            | Error::MalformedRecord { .. }
            | Error::InvalidInstance(_) => 1,
            Error::CertificationFailed(_) | Error::RejectionBudgetExceeded { .. } => 2,
            Error::DimensionMismatch { .. }
            | Error::MembershipViolation { .. }
            | Error::OracleDisagreement { .. }
            | Error::InvalidCall(_)
            | Error::IterationBoundExceeded { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
