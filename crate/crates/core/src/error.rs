use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("starved source: control stage passed {passed} pairs at setting {setting:.6} rad (need at least {required})")]
    StarvedSource {
        setting: f64,
        passed: u64,
        required: u64,
    },

    #[error("quadrature did not converge: cell {cell} moved by {delta:.3e} when doubling nodes")]
    ConvergenceFailure { cell: &'static str, delta: f64 },

    #[error("worker pool: {0}")]
    WorkerPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
