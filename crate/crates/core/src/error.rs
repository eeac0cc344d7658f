use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("stream error: {0}")]
    Stream(#[from] io::Error),

    #[error("level {level} is outside the supported range 0..={cap}")]
    LevelOutOfRange { level: u32, cap: u32 },

    #[error("{0} lies outside the bounding box")]
    OutsideBox(String),

    #[error("cuboid addresses mix levels {first} and {other}")]
    MixedLevels { first: u8, other: u8 },

    #[error("octree does not match cloud: {0}")]
    TreeMismatch(String),

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error class.
    ///
    /// 2 usage/config, 3 parse, 4 I/O, 5 integrity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::LevelOutOfRange { .. } => 2,
            Error::Parse { .. } | Error::EmptyCloud => 3,
            Error::Io { .. } | Error::Stream(_) => 4,
            Error::OutsideBox(_)
            | Error::MixedLevels { .. }
            | Error::TreeMismatch(_)
            | Error::Integrity(_) => 5,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
