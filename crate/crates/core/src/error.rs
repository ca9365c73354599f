use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("function leaves [0, 1] on the decision set: {}", format_violations(.0))]
    RangeViolation(Vec<(Vec<f64>, f64)>),

    #[error("point {0:?} is not in the decision set")]
    NotInDecisionSet(Vec<f64>),

    #[error("arm index {index} out of range for {arms} arms")]
    ArmOutOfRange { index: usize, arms: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("policy contract violated: {0}")]
    Contract(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn format_violations(v: &[(Vec<f64>, f64)]) -> String {
    v.iter()
        .map(|(x, fx)| format!("f({x:?}) = {fx}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
