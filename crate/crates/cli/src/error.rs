use thiserror::Error;

/// Failure of one invocation; the variant picks the exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{kind}: {message}")]
    Numerical { kind: &'static str, message: String },

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Numerical { .. } => "numerical",
            CliError::Io(_) => "io",
        }
    }
}

impl From<qfdr_core::Error> for CliError {
    fn from(e: qfdr_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical {
                kind: e.kind(),
                message: e.to_string(),
            }
        } else {
            CliError::Validation(format!("{}: {e}", e.kind()))
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
