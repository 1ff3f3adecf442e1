//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ChainError>;

#[derive(Debug, Error)]
pub enum ChainError {
    /// A parameter lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// The coupling matrix is singular or numerically indistinguishable
    /// from singular. Carries the condition-number estimate so callers
    /// can log or skip the offending parameter point.
    #[error("critical point: condition estimate {condition:.3e} exceeds threshold")]
    CriticalPoint { condition: f64 },

    #[error("eigensolver did not converge: {0}")]
    EigenSolver(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// Threshold crossing not reached before `t_max`.
    #[error("no threshold crossing before t_max = {t_max}")]
    Timeout { t_max: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("unknown recipe `{name}`; valid names: {valid}")]
    UnknownRecipe { name: String, valid: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ChainError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ChainError::Domain(msg.into())
    }
}
