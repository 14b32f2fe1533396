use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("time {t} s is outside the visible window [{ws}, {we}] of task {task}")]
    OutOfWindow { task: usize, t: f64, ws: f64, we: f64 },

    #[error("invalid transition model: {0}")]
    InvalidTransition(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid environment realization: {0}")]
    InvalidEnvironment(String),

    #[error("cannot average an empty list of profits")]
    EmptyProfits,

    #[error("invalid distribution parameters: {0}")]
    InvalidDistribution(String),

    #[error("policy parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("gap is undefined for a zero reference value")]
    UndefinedGap,

    #[error("refusing to overwrite existing path {}", .0.display())]
    PathExists(PathBuf),

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
