use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("unknown problem `{0}` (expected sod, leblanc_tangliu or smooth)")]
    UnknownProblem(String),

    #[error("{problem}/{scheme}/{n_cells}: numerical failure at t = {time} (step {step}): {source}")]
    Numerical {
        problem: String,
        scheme: String,
        n_cells: usize,
        time: f64,
        step: usize,
        #[source]
        source: grp_core::Error,
    },

    #[error("{failed} of {total} sweep runs failed")]
    SweepFailures { failed: usize, total: usize },

    #[error(transparent)]
    Core(#[from] grp_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    /// Process exit code: 1 for bad input, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Parse { .. } | BenchError::Validation { .. } | BenchError::UnknownProblem(_) => 1,
            BenchError::Core(e) => match e {
                grp_core::Error::InvalidScheme(_) | grp_core::Error::InvalidGamma(_) | grp_core::Error::InvalidGrid(_) => 1,
                _ => 2,
            },
            BenchError::Numerical { .. } | BenchError::SweepFailures { .. } => 2,
            BenchError::Io { .. } | BenchError::Csv(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io { path: path.into(), source }
    }
}
