use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] landau_core::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
    #[error("check failed: {0}")]
    Flagged(String),
}

impl CliError {
    /// 2 for configuration errors, 3 for numerical failures, 4 for resource caps.
    pub fn exit_code(&self) -> i32 {
        use landau_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Flagged(_) => 3,
            CliError::Core(e) => match e {
                E::InvalidInput(_) | E::Io(_) | E::Json(_) => 2,
                E::NonConvergence { .. } | E::Eigensolver(_) | E::Consistency(_) => 3,
                E::ResourceCap { .. } => 4,
            },
        }
    }
}
