use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] otfs_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Core(otfs_core::Error::Numerical(_)) => 3,
            SimError::Core(_) => 2,
            SimError::Io { .. } => 1,
        }
    }
}

pub type SimResult<T> = Result<T, SimError>;
