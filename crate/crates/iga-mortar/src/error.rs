use std::path::PathBuf;

use iga_mortar_core::ErrorKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] iga_mortar_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("geometry file {path}: {message}")]
    GeometryFile { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 configuration, 3 geometry, 4 solver, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::GeometryFile { .. } => 3,
            CliError::Io { .. } => 5,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Geometry => 3,
                ErrorKind::Solver => 4,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
