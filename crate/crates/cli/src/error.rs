use std::fmt;

use curved2body::Error;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::Domain(_) => 2,
                Error::NearCollision { .. } => 4,
                Error::Infeasible(_) | Error::Unsupported(_) => 5,
                Error::Chart(_) | Error::NonConvergence { .. } | Error::StepUnderflow { .. } | Error::NonFinite { .. } => 3,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
