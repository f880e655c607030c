//! Error-to-exit-code mapping. The process exit codes are part of the
//! interface: 0 success, 2 configuration error, 3 threshold or pole
//! rejection, 4 verification failure, 5 I/O failure, 1 anything else.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Threshold(String),
    Verification(String),
    Io(String),
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Computation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Threshold(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m)
            | CliError::Threshold(m)
            | CliError::Verification(m)
            | CliError::Io(m)
            | CliError::Computation(m) => f.write_str(m),
        }
    }
}

impl From<oscavity::Error> for CliError {
    fn from(err: oscavity::Error) -> Self {
        match &err {
            oscavity::Error::InvalidParameter { .. } | oscavity::Error::InconsistentMirrors(_) => {
                CliError::Config(err.to_string())
            }
            oscavity::Error::ThresholdExceeded { .. } | oscavity::Error::PoleProximity { .. } => {
                CliError::Threshold(err.to_string())
            }
            _ => CliError::Computation(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}
