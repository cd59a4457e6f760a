use thiserror::Error;

/// Everything the command line can fail with, mapped onto exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] permpack_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_CAP: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use permpack_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_PARSE,
            CliError::Internal(_) => EXIT_INTERNAL,
            CliError::Core(e) => match e {
                E::MalformedPermutation(_)
                | E::Parse(_)
                | E::IndexOutOfRange { .. }
                | E::InvalidIndexSet(_)
                | E::DimensionMismatch { .. } => EXIT_PARSE,
                E::NotLayered(_) | E::Infeasible(_) | E::Hypothesis(_) => EXIT_HYPOTHESIS,
                E::CapExceeded { .. } => EXIT_CAP,
                E::Inconsistency(_) => EXIT_INTERNAL,
            },
        }
    }
}
