use std::fmt;

/// Failure of a CLI run, split by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, malformed input files, unwritable outputs.
    Usage(String),
    /// The estimator or a downstream step failed on valid input.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ptransform::Error> for CliError {
    fn from(e: ptransform::Error) -> Self {
        use ptransform::Error as E;
        match e {
            E::DegeneratePrediction
            | E::LaguerreDiverged { .. }
            | E::Underdetermined { .. }
            | E::EmptyBase
            | E::NodeAtOrigin
            | E::ZeroArea
            | E::SweepFailed(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
