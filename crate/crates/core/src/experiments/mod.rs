//! Simulation and evaluation harness: the high-cardinality bias simulations
//! (null and power case), the drop-feature ablation and K-fold error
//! benchmarks comparing CVB against the training-gain baseline.

mod kfold;
mod simulate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boosting::{BoostError, BoostParams, Loss};
use crate::dataset::DatasetError;
use crate::importance::ImportanceError;
use crate::tree::GrowthParams;

pub use kfold::{run_ablation, run_error_benchmark, AblationRow, BenchmarkRow, BenchmarkSummary, BenchmarkTable};
pub use simulate::{
    aggregate, gen_null_target, gen_power_target, gen_strobl_features, repetition_data, run_bias_experiment,
    simulate_repetition, ExperimentReport, MethodSummary, RepOutcome, ReportRow, StroblConfig,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Boost(#[from] BoostError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Importance(#[from] ImportanceError),
    #[error("X1 code {0} is outside the 10-symbol alphabet of the power case")]
    CardinalityMismatch(u32),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Cross-validated split selection.
    #[serde(rename = "CVB")]
    Cvb,
    /// Classic training-gain GBM.
    #[serde(rename = "TrainGainGBM")]
    TrainGainGbm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cvb => "CVB",
            Method::TrainGainGbm => "TrainGainGBM",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s.to_ascii_lowercase().as_str() {
            "cvb" | "cv" => Some(Method::Cvb),
            "gain" | "traingain" | "traingaingbm" | "vanilla" => Some(Method::TrainGainGbm),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExpMeasure {
    #[serde(rename = "gain")]
    Gain,
    #[serde(rename = "split-count")]
    SplitCount,
    #[serde(rename = "cover")]
    Cover,
    #[serde(rename = "pfi-train")]
    PfiTrain,
    #[serde(rename = "pfi-test")]
    PfiTest,
}

impl ExpMeasure {
    pub const ALL: [ExpMeasure; 5] =
        [ExpMeasure::Gain, ExpMeasure::SplitCount, ExpMeasure::Cover, ExpMeasure::PfiTrain, ExpMeasure::PfiTest];

    pub fn name(self) -> &'static str {
        match self {
            ExpMeasure::Gain => "gain",
            ExpMeasure::SplitCount => "split-count",
            ExpMeasure::Cover => "cover",
            ExpMeasure::PfiTrain => "pfi-train",
            ExpMeasure::PfiTest => "pfi-test",
        }
    }

    pub fn parse(s: &str) -> Option<ExpMeasure> {
        ExpMeasure::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Model hyper-parameters shared by all experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub folds: usize,
    pub min_samples_leaf: usize,
    pub n_permutations: usize,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings {
            n_trees: 100,
            learning_rate: 0.1,
            max_depth: 3,
            folds: 5,
            min_samples_leaf: 1,
            n_permutations: 20,
        }
    }
}

impl ModelSettings {
    pub fn boost_params(&self, method: Method, loss: Loss, seed: u64) -> BoostParams {
        let growth = match method {
            Method::Cvb => GrowthParams::cross_validated(self.max_depth, self.folds),
            Method::TrainGainGbm => GrowthParams::train_gain(self.max_depth),
        };
        BoostParams {
            n_trees: self.n_trees,
            learning_rate: self.learning_rate,
            growth: GrowthParams { min_samples_leaf: self.min_samples_leaf, ..growth },
            loss,
            seed,
        }
    }
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in ExpMeasure::ALL {
            assert_eq!(ExpMeasure::parse(m.name()), Some(m));
        }
        assert_eq!(Method::parse("cvb"), Some(Method::Cvb));
        assert_eq!(Method::parse("gain"), Some(Method::TrainGainGbm));
        assert_eq!(Method::parse("xgb"), None);
    }

    #[test]
    fn mean_std_sample() {
        assert_eq!(mean_std(&[]), (0.0, 0.0));
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cvb_params_use_fold_bound() {
        let p = ModelSettings::default().boost_params(Method::Cvb, Loss::LogLoss, 1);
        assert_eq!(p.growth.min_samples_split, 10);
        assert!(p.validate().is_ok());
    }
}
