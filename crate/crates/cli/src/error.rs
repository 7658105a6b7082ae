//! Error type of the command-line layer, with a stable mapping to process
//! exit codes: configuration problems exit 2, numerical or physicality
//! failures exit 3, I/O problems exit 1.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration: unknown keys, missing fields, constraint
    /// violations, malformed command-line values.
    Config(String),
    /// The numerics refused or failed: unstable step, root residuals,
    /// physicality violation.
    Numeric(String),
    /// Filesystem / serialization trouble unrelated to the physics.
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<duobath_core::Error> for CliError {
    fn from(e: duobath_core::Error) -> Self {
        use duobath_core::Error as E;
        match &e {
            E::Domain(_) | E::Parameter(_) | E::Contract(_) => CliError::Config(e.to_string()),
            E::Numerical(_) | E::Physicality { .. } | E::DecoupledCross => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
