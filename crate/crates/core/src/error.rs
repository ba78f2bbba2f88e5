use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular generator: {0}")]
    Singular(String),

    #[error("no convergence: {0}")]
    Convergence(String),
}

impl Error {
    /// Singularity and convergence failures; everything else is bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Singular(_) | Error::Convergence(_))
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension",
            Error::DimensionCap { .. } => "dimension_cap",
            Error::Contract(_) => "contract",
            Error::Domain(_) => "domain",
            Error::Singular(_) => "singular",
            Error::Convergence(_) => "convergence",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
