use std::path::PathBuf;

use thiserror::Error;

use crate::grid::Basis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A wavefunction does not decay to zero before the grid edge.
    #[error("tail containment violated: {0}")]
    TailContainment(String),

    /// The t-scaled support of the reduced state would wrap around the grid.
    #[error(
        "{basis} grid half-width {half_width:.4} is smaller than the required {required:.4} \
         at t = {t}; enlarge the grid"
    )]
    SupportOverflow {
        basis: Basis,
        t: f64,
        half_width: f64,
        required: f64,
    },

    #[error("oracle axis of {requested} points exceeds the cap of {cap}")]
    OracleCap { requested: usize, cap: usize },

    #[error("density matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("density matrix invariant violated: {0}")]
    Invariant(String),

    #[error("metric undefined: {0}")]
    Metric(String),

    #[error("{} validation error(s):\n  {}", .0.len(), .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("at t = {t} ({stage}): {source}")]
    Stage {
        t: f64,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status: 1 for rejected input, 3 for I/O, 2 for any
    /// failure of an internal check during computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Config(_)
            | Error::Grid(_)
            | Error::SupportOverflow { .. }
            | Error::OracleCap { .. } => 1,
            Error::Io { .. } => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at(self, t: f64, stage: &'static str) -> Self {
        Error::Stage {
            t,
            stage,
            source: Box::new(self),
        }
    }
}
