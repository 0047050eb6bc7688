//! Experiment plumbing: JSON configs, single runs, parameter sweeps,
//! MNIST ingestion and the canned bench recipes.

use std::path::{Path, PathBuf};

pub mod bench;
pub mod config;
pub mod experiment;
pub mod inspect;
pub mod mnist;
pub mod sweep;

pub use bench::{run_bench, BenchId, BenchReport};
pub use config::{
    load_config, DatasetSpec, Experiment, ExperimentConfig, NetworkSpec, ObjectiveConfig,
    ObjectiveSpec, OutputSpec, Partition,
};
pub use experiment::{run_experiment, simulate, RunOutcome, RunResult, RunSummary, RunVerdict};
pub use inspect::{network_report, NetworkReport};
pub use mnist::{load_mnist_idx, MnistError};
pub use sweep::{load_sweep, read_sweep_csv, run_sweep, SweepGrid, SweepRow, SweepSpec};

use crate::dynamics::DynamicsError;
use crate::graph::GraphError;
use crate::objectives::ObjectiveError;
use crate::spectrum::SpectrumError;

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_DIVERGED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error at `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Mnist(#[from] MnistError),
}

impl HarnessError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        HarnessError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn missing_file(path: &Path) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "file does not exist"),
        }
    }

    pub(crate) fn output(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Output {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status: problems with the inputs map to
    /// [`EXIT_CONFIG`], everything else to [`EXIT_DIVERGED`].
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } | HarnessError::Io { .. } | HarnessError::Mnist(_) => {
                EXIT_CONFIG
            }
            HarnessError::Graph(GraphError::Parse(_) | GraphError::Io(_)) => EXIT_CONFIG,
            HarnessError::Objective(ObjectiveError::Csv(_) | ObjectiveError::Io(_)) => EXIT_CONFIG,
            _ => EXIT_DIVERGED,
        }
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::output(dir, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    std::fs::write(path, bytes).map_err(|e| HarnessError::output(path, e))
}
