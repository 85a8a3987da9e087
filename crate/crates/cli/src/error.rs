use thiserror::Error;

/// Command-line errors, each class with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::NonConvergence(_) => 5,
            CliError::Io(_) => 6,
        }
    }

    /// Core errors raised while computing map onto the numeric classes;
    /// validation failures surface as configuration errors.
    pub fn from_core(err: fanoatom::Error) -> Self {
        match err {
            fanoatom::Error::InvalidInput(msg) => CliError::Config(msg),
            fanoatom::Error::Singular(what) => {
                CliError::Numeric(format!("singular denominator in {what}"))
            }
            fanoatom::Error::Numerics(msg) => CliError::Numeric(msg),
            fanoatom::Error::NoSteadyState { horizon, best } => CliError::NonConvergence(format!(
                "steady state not reached within {horizon} ns (best estimate {best})"
            )),
            fanoatom::Error::FlatObjective(msg) => CliError::Data(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub trait CoreResultExt<T> {
    fn or_cli(self) -> CliResult<T>;
}

impl<T> CoreResultExt<T> for fanoatom::Result<T> {
    fn or_cli(self) -> CliResult<T> {
        self.map_err(CliError::from_core)
    }
}
