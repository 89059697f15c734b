use std::fmt;

use fhg_core::FhgError;

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum CliError {
    /// some checked invariant does not hold
    Verification(String),
    Usage(String),
    Io(String),
    Engine(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Engine(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, e: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(m) | CliError::Usage(m) | CliError::Io(m) | CliError::Engine(m) => f.write_str(m),
        }
    }
}

impl From<FhgError> for CliError {
    fn from(e: FhgError) -> Self {
        let msg = e.to_string();
        match e {
            FhgError::Io(_) => CliError::Io(msg),
            FhgError::RecursionEnumerationMismatch(_) => CliError::Verification(msg),
            ref e if e.is_engine_violation() => CliError::Engine(msg),
            FhgError::InvalidArgument(_)
            | FhgError::InvalidSpec(_)
            | FhgError::InvalidBeta(_)
            | FhgError::UnknownAlgorithm(_)
            | FhgError::InvalidInstance(_)
            | FhgError::InstanceTooLarge { .. }
            | FhgError::UnknownAgent { .. }
            | FhgError::Json(_) => CliError::Usage(msg),
            _ => CliError::Engine(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
