use std::fmt;

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad usage or configuration: exit 2.
    Usage(String),
    /// An invariant or run failed: exit 1.
    Failure(String),
    /// The solver aborted: exit 3.
    Abort(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Abort(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) | CliError::Abort(m) => f.write_str(m),
        }
    }
}

impl From<qglab::Error> for CliError {
    fn from(e: qglab::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failure(format!("json: {e}"))
    }
}

/// Maps a library error raised while setting up from config to a usage error.
pub fn setup(e: qglab::Error) -> CliError {
    CliError::Usage(e.to_string())
}
