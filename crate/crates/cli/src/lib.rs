//! File formats, reports and the `verify` suite behind the `fibergraph`
//! command-line tool.

pub mod formats;
pub mod verify;

use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const CHECK_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const RESOURCE_GUARD: u8 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}: {message}")]
    Parse { source_name: String, message: String },
    #[error("format `{format}` is not supported by `{command}`")]
    UnsupportedFormat { format: String, command: &'static str },
    #[error("{0}")]
    ResourceGuard(String),
    #[error(transparent)]
    Core(#[from] fibergraph_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::ResourceGuard(_) | Self::Core(fibergraph_core::Error::SizeLimitExceeded { .. }) => exit::RESOURCE_GUARD,
            _ => exit::USAGE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
