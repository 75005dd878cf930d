use std::path::PathBuf;

/// Errors produced anywhere in the engine.
///
/// The CLI maps these onto process exit codes via [`Error::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("training diverged at epoch {epoch}: {detail}")]
    TrainingDivergence { epoch: usize, detail: String },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("no viable config: every grid cell diverged")]
    NoViableConfig,

    #[error("checkpoint version {found} does not match supported version {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Exit-code contract: 2 input error, 3 divergence, 4 version mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::TrainingDivergence { .. } | Error::NoViableConfig => 3,
            Error::VersionMismatch { .. } => 4,
            Error::Internal(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
