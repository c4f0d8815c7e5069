use std::path::PathBuf;

use thiserror::Error;

use crate::model::{JobError, TaskId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid job graph: {}", join_errors(.0))]
    InvalidJob(Vec<JobError>),

    #[error("invalid network configuration: {0}")]
    InvalidNetwork(String),

    #[error("schedule has no slot for task {0}")]
    MissingTaskSlot(TaskId),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("instance exceeds oracle limits: {0}")]
    OracleLimit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn join_errors(errs: &[JobError]) -> String {
    errs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
