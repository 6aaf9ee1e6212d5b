//! File-system side of the toolchain: container scanning, input loading,
//! the static and dynamic pipelines, and report files. The analyses
//! themselves live in `ioscope-core`.

pub mod analysis;
pub mod cli;
pub mod inputs;
pub mod output;
pub mod scan;

use std::io;
use std::path::PathBuf;

use ioscope_core::natives::DbError;
use ioscope_core::reach::ReachError;
use ioscope_core::trace::AttributeError;
use ioscope_core::TraceError;

pub use scan::{scan_container, EntryError, Scan, ScanError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad command line or configuration.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error("{}: {source}", path.display())]
    Db { path: PathBuf, source: DbError },
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Attribute(#[from] AttributeError),
    #[error("{}: {source}", path.display())]
    Trace { path: PathBuf, source: TraceError },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("writing {}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("writing {}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
}

impl Error {
    /// 2 for usage errors, 1 for everything that went wrong during analysis.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
