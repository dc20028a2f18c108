use thiserror::Error;

/// Exit status 2: the scenario could not be read or does not validate.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status 3: the computation produced a non-finite or unsound result.
pub const EXIT_NUMERIC: u8 = 3;
/// Exit status 1: a check ran to completion and failed.
pub const EXIT_CHECK_FAILED: u8 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    /// Parameter and shape errors are the user's; everything else is numeric.
    pub fn from_core(e: stochreach::Error, context: Option<&str>) -> Self {
        use stochreach::Error as E;
        let text = match context {
            Some(c) => format!("{c}: {e}"),
            None => e.to_string(),
        };
        match e {
            E::DimensionMismatch { .. }
            | E::InvalidInterval { .. }
            | E::InvalidProbability { .. }
            | E::InvalidParameter(_) => CliError::Config(text),
            _ => CliError::Numeric(text),
        }
    }
}

impl From<stochreach::Error> for CliError {
    fn from(e: stochreach::Error) -> Self {
        CliError::from_core(e, None)
    }
}
