use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boosting::{fit, Loss, Metric};
use crate::dataset::{kfold_split, Dataset, Task};
use crate::seed::derive_seed;

use super::{mean_std, ExperimentError, Method, ModelSettings};

const FOLD_FIT_STREAM: u64 = 0x4b4649;

fn loss_for(task: Task) -> Loss {
    match task {
        Task::Regression => Loss::SquaredError,
        Task::BinaryClassification => Loss::LogLoss,
    }
}

/// Test error of every method on every fold, in fold order.
fn fold_errors(
    data: &Dataset<f64>,
    k: usize,
    methods: &[Method],
    settings: &ModelSettings,
    metric: Metric,
    seed: u64,
) -> Result<Vec<(Method, usize, f64)>, ExperimentError> {
    let folds = kfold_split(data, k, seed)?;
    let loss = loss_for(data.task());
    let jobs: Vec<(usize, Method)> =
        (0..folds.len()).flat_map(|f| methods.iter().map(move |&m| (f, m))).collect();
    jobs.into_par_iter()
        .map(|(f, method)| {
            let (train, test) = &folds[f];
            let params = settings.boost_params(method, loss, derive_seed(&[FOLD_FIT_STREAM, seed, f as u64]));
            let model = fit(train, &params)?;
            Ok((method, f, model.evaluate(test, metric)?))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub method: Method,
    /// `"full"` or `"reduced"`.
    pub feature_set: String,
    pub fold: usize,
    pub error: f64,
}

/// K-fold errors with all features and with `drop_features` removed. Both
/// feature sets use the same folds and fit seeds so rows pair by fold.
pub fn run_ablation(
    data: &Dataset<f64>,
    drop_features: &[String],
    k: usize,
    methods: &[Method],
    settings: &ModelSettings,
    metric: Metric,
    seed: u64,
) -> Result<Vec<AblationRow>, ExperimentError> {
    let reduced = data.drop_features(drop_features)?;
    let mut rows = Vec::new();
    for (name, d) in [("full", data), ("reduced", &reduced)] {
        for (method, fold, error) in fold_errors(d, k, methods, settings, metric, seed)? {
            rows.push(AblationRow { method, feature_set: name.to_string(), fold, error });
        }
    }
    rows.sort_by(|a, b| {
        (a.method, a.feature_set.as_str(), a.fold).cmp(&(b.method, b.feature_set.as_str(), b.fold))
    });
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub method: Method,
    pub fold: usize,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub method: Method,
    pub mean: f64,
    pub std: f64,
    pub folds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub metric: Metric,
    pub per_fold: Vec<BenchmarkRow>,
    pub summary: Vec<BenchmarkSummary>,
}

/// K-fold mean and standard deviation of the test error per method.
/// With `log_target` the regression target is replaced by its natural log.
pub fn run_error_benchmark(
    data: &Dataset<f64>,
    k: usize,
    methods: &[Method],
    settings: &ModelSettings,
    metric: Metric,
    log_target: bool,
    seed: u64,
) -> Result<BenchmarkTable, ExperimentError> {
    let transformed;
    let data = if log_target {
        if data.task() != Task::Regression {
            return Err(ExperimentError::InvalidConfig("log-target applies to regression only".into()));
        }
        transformed = data.log_target()?;
        &transformed
    } else {
        data
    };
    let mut per_fold: Vec<BenchmarkRow> = fold_errors(data, k, methods, settings, metric, seed)?
        .into_iter()
        .map(|(method, fold, error)| BenchmarkRow { method, fold, error })
        .collect();
    per_fold.sort_by_key(|r| (r.method, r.fold));
    let summary = methods
        .iter()
        .map(|&method| {
            let errs: Vec<f64> = per_fold.iter().filter(|r| r.method == method).map(|r| r.error).collect();
            let (mean, std) = mean_std(&errs);
            BenchmarkSummary { method, mean, std, folds: errs.len() }
        })
        .collect();
    Ok(BenchmarkTable { metric, per_fold, summary })
}
