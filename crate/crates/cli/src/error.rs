use std::fmt;

/// Exit statuses. A run that completes with a failed check exits with
/// [`EXIT_CHECK_FAILED`]; the rest come from [`CliError::exit_code`].
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;
pub const EXIT_INVALID_PARAMETER: i32 = 5;
pub const EXIT_OUTPUT: i32 = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    /// Config file unreadable, malformed, or with an unknown key.
    Config(String),
    InvalidParameter(String),
    /// Blow-up, ill-conditioning, failed convergence.
    Numerical(String),
    /// An output file could not be written.
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::InvalidParameter(_) => EXIT_INVALID_PARAMETER,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Output(_) => EXIT_OUTPUT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<burgers_drift::Error> for CliError {
    fn from(e: burgers_drift::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::InvalidParameter(e.to_string())
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
