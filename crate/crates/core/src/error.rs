use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("prime basis must contain at least one prime")]
    EmptyBasis,

    #[error("prime index {k} is beyond the basis size {k_max}")]
    IndexOutOfRange { k: usize, k_max: usize },

    #[error("divisor must be nonzero")]
    ZeroDivisor,

    #[error("primorial P_{k} is too large for the exact oracle (limit {limit})")]
    OracleRange { k: usize, limit: u64 },

    #[error("table for k = {k} is out of the supported range 1..={max}")]
    TableRange { k: usize, max: usize },

    #[error("no base table loaded for k = {0}")]
    MissingTable(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: malformed table file: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: checksum mismatch")]
    Checksum { path: PathBuf },

    #[error("search budget of {budget} evaluations exhausted at k = {k}, m = {m}")]
    Budget { budget: u64, k: usize, m: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
