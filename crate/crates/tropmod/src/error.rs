use tropmod_core::{ComplexError, ReconstructionError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// unreadable or malformed input, or an invalid (g, n)
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Reconstruction(#[from] ReconstructionError),
    /// a check ran and failed
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 for usage problems, 1 for domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Complex(ComplexError::NotHyperbolic) => 2,
            _ => 1,
        }
    }
}
