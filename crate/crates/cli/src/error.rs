use cvboost::experiments::ExperimentError;
use cvboost::{BoostError, DatasetError, ImportanceError, TreeError};
use thiserror::Error;

/// Exit status for configuration and usage errors (clap uses the same code).
pub const EXIT_USAGE: i32 = 2;
/// Exit status for data and model errors.
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Flags that parse but do not make sense together.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or inconsistent inputs, models and output paths.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::InvalidFoldCount(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::InvalidParams(msg) => CliError::Usage(msg),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<BoostError> for CliError {
    fn from(e: BoostError) -> Self {
        match e {
            BoostError::Tree(t) => t.into(),
            BoostError::Dataset(d) => d.into(),
            BoostError::InvalidParams(_) | BoostError::WrongMetric { .. } | BoostError::WrongLoss => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ImportanceError> for CliError {
    fn from(e: ImportanceError) -> Self {
        match e {
            ImportanceError::Boost(b) => b.into(),
            ImportanceError::MetricIncompatible { .. } | ImportanceError::NoPermutations => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Boost(b) => b.into(),
            ExperimentError::Dataset(d) => d.into(),
            ExperimentError::Importance(i) => i.into(),
            ExperimentError::InvalidConfig(msg) => CliError::Usage(msg),
            other => CliError::Data(other.to_string()),
        }
    }
}
