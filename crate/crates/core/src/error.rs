use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Certificate or lemma parameters admit no solution.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("non-finite value in {what} at iteration {iteration}")]
    NonFinite { iteration: usize, what: &'static str },

    #[error("diverged at iteration {iteration}: objective {value:e} exceeds initial {initial:e} by more than {factor:e}")]
    Diverged { iteration: usize, value: f64, initial: f64, factor: f64 },

    #[error("gradient block {0} has not been initialized")]
    UninitializedBlock(usize),

    #[error("schedule invariant violated at iteration {iteration}: {reason}")]
    ScheduleInvariant { iteration: usize, reason: String },

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
