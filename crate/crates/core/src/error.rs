use num_complex::Complex64;
use thiserror::Error;

/// Errors shared by the scattering, integration, and fitting routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter or argument lies outside its physical range.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A denominator collapsed below the representable threshold.
    #[error("singular denominator in {0}")]
    Singular(&'static str),

    /// A numerical routine failed to reach its accuracy target.
    #[error("numerical failure: {0}")]
    Numerics(String),

    /// Time-domain integration hit the horizon before settling.
    #[error("steady state not reached within {horizon} ns; best estimate {best}")]
    NoSteadyState { horizon: f64, best: Complex64 },

    /// The fit objective carries no information about the free parameters.
    #[error("flat objective: {0}")]
    FlatObjective(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &str, reason: impl std::fmt::Display) -> Self {
        Error::InvalidInput(format!("{name}: {reason}"))
    }
}
