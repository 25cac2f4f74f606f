use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate sample: all values are equal")]
    DegenerateSample,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("simulation stalled at t={time_s:.1} s with {pending} jobs unfinished")]
    Stall { time_s: f64, pending: usize },

    #[error("task `{0}` is not present in the trace")]
    UnknownTask(String),

    #[error("task `{task}` did not complete ({completed}/{total} jobs)")]
    IncompleteTask {
        task: String,
        completed: usize,
        total: usize,
    },

    #[error("integrator blow-up at strain {strain:.4}: atoms {i} and {j} at distance {distance:.4}")]
    BlowUp {
        strain: f64,
        i: usize,
        j: usize,
        distance: f64,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("strain {requested} not found; available checkpoints: {available:?}")]
    MissingCheckpoint { requested: f64, available: Vec<f64> },

    #[error("{0}")]
    Sweep(String),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
