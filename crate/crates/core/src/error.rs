use thiserror::Error;

/// Errors raised by chart maps, observables and integrators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Point lies outside the region where the parabolic chart or an observable is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A primitive inside an autodiff evaluation produced an undefined value.
    #[error("evaluation error in `{primitive}`: {detail}")]
    Eval {
        primitive: &'static str,
        detail: String,
    },

    /// Implicit step did not converge.
    #[error("step failure: Newton residual {residual:e} after {iterations} iterations")]
    StepFailure { residual: f64, iterations: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
