use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The gauge has an infinite extended right derivative at 0.
    #[error("gauge `{0}` is not well-behaved (right derivative at 0 is infinite); cap it first")]
    NotWellBehaved(String),

    #[error("measurement system is infeasible: {0}")]
    Infeasible(String),

    /// The measurement operator is injective, so the nullspace condition holds vacuously.
    #[error("operator has an empty nullspace")]
    EmptyNullspace,

    #[error("invalid failure witness: {0}")]
    InvalidWitness(String),

    #[error("diagonal entries are not distinct enough: {0}")]
    DistinctnessViolated(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::InvalidInput(msg.into()))
}
