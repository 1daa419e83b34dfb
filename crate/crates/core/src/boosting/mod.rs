//! Gradient boosting over regression trees.
//!
//! Each iteration fits a tree to the negative loss gradient, replaces every
//! leaf value by a per-leaf line-search step, and adds the shrunken tree to
//! the model. Growing a stub (no split anywhere) ends training early: the
//! residual structure the selector can see is exhausted and every later
//! tree would be the same stub.

mod loss;
mod model;
mod persist;

use thiserror::Error;

use crate::dataset::{DatasetError, Task};
use crate::num::Real;
use crate::tree::{grow_tree_partitioned, GrowthParams, TreeError};
use crate::Dataset;

pub use loss::{init_constant, leaf_step, negative_gradient, sigmoid, Loss, LEAF_STEP_CLAMP, PROBA_EPS};
pub use model::{Ensemble, FeatureMeta, Metric};
pub use persist::FORMAT_VERSION;

#[derive(Debug, Error)]
pub enum BoostError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("log-loss needs both classes in the target (mean = {0})")]
    DegenerateTarget(f64),
    #[error("invalid boosting parameters: {0}")]
    InvalidParams(String),
    #[error("operation requires the log-loss model")]
    WrongLoss,
    #[error("metric {metric:?} is not defined for {loss:?} models")]
    WrongMetric { metric: Metric, loss: Loss },
    #[error("model was fitted on {expected} features, data has {found}")]
    FeatureCountMismatch { expected: usize, found: usize },
    #[error("feature {index} is `{found}` in the data but `{expected}` in the model")]
    FeatureMismatch { index: usize, expected: String, found: String },
    #[error("unsupported model format version {0}")]
    IncompatibleVersion(u64),
    #[error("malformed model: {0}")]
    MalformedModel(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoostParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub growth: GrowthParams,
    pub loss: Loss,
    pub seed: u64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_trees: 100,
            learning_rate: 0.1,
            growth: GrowthParams::train_gain(3),
            loss: Loss::SquaredError,
            seed: 0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<(), BoostError> {
        if self.n_trees == 0 {
            return Err(BoostError::InvalidParams("n_trees must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(BoostError::InvalidParams(format!(
                "learning_rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        self.growth.validate()?;
        Ok(())
    }
}

/// Fits an ensemble. See [`fit_with_callback`].
pub fn fit<F: Real>(data: &Dataset<F>, params: &BoostParams) -> Result<Ensemble<F>, BoostError> {
    fit_with_callback(data, params, |_, _| {})
}

/// Fits an ensemble, calling `on_stage(m, scores)` with the training raw
/// scores after the constant model (`m = 0`) and after every kept tree.
pub fn fit_with_callback<F: Real>(
    data: &Dataset<F>,
    params: &BoostParams,
    mut on_stage: impl FnMut(usize, &[F]),
) -> Result<Ensemble<F>, BoostError> {
    params.validate()?;
    let n = data.n_rows();
    if n < params.growth.min_samples_split {
        return Err(BoostError::Dataset(DatasetError::TooFewRows {
            rows: n,
            folds: params.growth.min_samples_split,
        }));
    }
    let y = data.target();
    if params.loss == Loss::LogLoss {
        if let Some((row, v)) = y.iter().enumerate().find(|(_, &v)| v != F::zero() && v != F::one()) {
            return Err(DatasetError::NonBinaryTarget { row: row + 1, value: v.as_f64() }.into());
        }
    }
    let f0 = init_constant(y, params.loss)?;
    let lr = F::from_f64(params.learning_rate);
    let rows: Vec<usize> = (0..n).collect();
    let mut raw = vec![f0; n];
    on_stage(0, &raw);

    let mut trees = Vec::new();
    for m in 1..=params.n_trees {
        let grad = negative_gradient(params.loss, y, &raw);
        let growth = GrowthParams { seed: params.seed, tree_idx: m, ..params.growth.clone() };
        let (mut tree, parts) = grow_tree_partitioned(data, &grad, &rows, &growth)?;
        if tree.is_stub() {
            break;
        }
        let mut steps = Vec::with_capacity(parts.len());
        tree.for_each_leaf_mut(|k, value| {
            let leaf_y: Vec<F> = parts[k].iter().map(|&i| y[i]).collect();
            let leaf_raw: Vec<F> = parts[k].iter().map(|&i| raw[i]).collect();
            *value = leaf_step(params.loss, &leaf_y, &leaf_raw);
            steps.push(*value);
        });
        for (part, step) in parts.iter().zip(steps) {
            for &i in part {
                raw[i] = raw[i] + lr * step;
            }
        }
        trees.push(tree);
        on_stage(m, &raw);
    }

    Ok(Ensemble {
        f0,
        trees,
        learning_rate: lr,
        loss: params.loss,
        task: match params.loss {
            Loss::SquaredError => Task::Regression,
            Loss::LogLoss => Task::BinaryClassification,
        },
        features: FeatureMeta::from_dataset(data),
        target_name: data.target_name().to_string(),
        n_trees_budget: params.n_trees,
    })
}
