use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnType, Dataset, Task};
use crate::num::{sum, Real};
use crate::tree::Tree;

use super::loss::{sigmoid, Loss, PROBA_EPS};
use super::BoostError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "mse")]
    Mse,
    #[serde(rename = "rmse")]
    Rmse,
    #[serde(rename = "logloss")]
    LogLoss,
}

impl Metric {
    pub fn default_for(loss: Loss) -> Metric {
        match loss {
            Loss::SquaredError => Metric::Mse,
            Loss::LogLoss => Metric::LogLoss,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::Rmse => "rmse",
            Metric::LogLoss => "logloss",
        }
    }

    fn compatible(self, loss: Loss) -> bool {
        matches!(
            (self, loss),
            (Metric::Mse | Metric::Rmse, Loss::SquaredError) | (Metric::LogLoss, Loss::LogLoss)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMeta {
    pub name: String,
    pub column_type: ColumnType,
    pub dictionary: Option<Vec<String>>,
}

impl FeatureMeta {
    pub fn from_dataset<F: Real>(data: &Dataset<F>) -> Vec<FeatureMeta> {
        data.feature_names()
            .iter()
            .zip(data.columns())
            .zip(data.dictionaries())
            .map(|((name, col), dictionary)| FeatureMeta {
                name: name.clone(),
                column_type: col.column_type(),
                dictionary,
            })
            .collect()
    }
}

/// `F(x) = f0 + learning_rate * sum_m tree_m(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble<F> {
    pub f0: F,
    pub trees: Vec<Tree<F>>,
    pub learning_rate: F,
    pub loss: Loss,
    pub task: Task,
    pub features: Vec<FeatureMeta>,
    pub target_name: String,
    /// Requested number of trees; `trees.len()` is smaller after early stop.
    pub n_trees_budget: usize,
}

impl<F: Real> Ensemble<F> {
    pub fn n_trees_fitted(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn dictionaries(&self) -> Vec<Option<Vec<String>>> {
        self.features.iter().map(|f| f.dictionary.clone()).collect()
    }

    /// Checks names/types against the model and re-encodes categorical
    /// labels with the training dictionaries (unknown labels become UNSEEN).
    pub fn prepare(&self, data: &Dataset<F>) -> Result<Dataset<F>, BoostError> {
        self.check_shape(data)?;
        Ok(data.encode_unseen(&self.dictionaries()))
    }

    fn check_shape(&self, data: &Dataset<F>) -> Result<(), BoostError> {
        if data.n_features() != self.n_features() {
            return Err(BoostError::FeatureCountMismatch {
                expected: self.n_features(),
                found: data.n_features(),
            });
        }
        for (index, (meta, (name, col))) in
            self.features.iter().zip(data.feature_names().iter().zip(data.columns())).enumerate()
        {
            if meta.name != *name || meta.column_type != col.column_type() {
                return Err(BoostError::FeatureMismatch {
                    index,
                    expected: format!("{} ({:?})", meta.name, meta.column_type),
                    found: format!("{} ({:?})", name, col.column_type()),
                });
            }
        }
        Ok(())
    }

    /// Raw scores using only the first `n_trees` trees.
    pub fn predict_raw_staged(&self, data: &Dataset<F>, n_trees: usize) -> Result<Vec<F>, BoostError> {
        self.check_shape(data)?;
        let trees = &self.trees[..n_trees.min(self.trees.len())];
        for t in trees {
            t.check_compatible(data)?;
        }
        Ok((0..data.n_rows())
            .map(|i| {
                trees
                    .iter()
                    .fold(self.f0, |acc, t| acc + self.learning_rate * t.predict_index(data, i))
            })
            .collect())
    }

    pub fn predict_raw(&self, data: &Dataset<F>) -> Result<Vec<F>, BoostError> {
        self.predict_raw_staged(data, self.trees.len())
    }

    /// Class-1 probabilities, clamped to `[PROBA_EPS, 1 - PROBA_EPS]`.
    pub fn predict_proba(&self, data: &Dataset<F>) -> Result<Vec<F>, BoostError> {
        if self.loss != Loss::LogLoss {
            return Err(BoostError::WrongLoss);
        }
        Ok(self.predict_raw(data)?.into_iter().map(clamped_proba).collect())
    }

    /// Mean per-row loss of the model on `data`.
    pub fn evaluate(&self, data: &Dataset<F>, metric: Metric) -> Result<F, BoostError> {
        if !metric.compatible(self.loss) {
            return Err(BoostError::WrongMetric { metric, loss: self.loss });
        }
        let raw = self.predict_raw(data)?;
        Ok(score(metric, data.target(), &raw))
    }
}

pub(crate) fn clamped_proba<F: Real>(raw: F) -> F {
    let eps = F::from_f64(PROBA_EPS);
    sigmoid(raw).max(eps).min(F::one() - eps)
}

/// Metric value of raw scores against targets (0 for empty input).
pub(crate) fn score<F: Real>(metric: Metric, targets: &[F], raw: &[F]) -> F {
    if targets.is_empty() {
        return F::zero();
    }
    let n = F::from_count(targets.len());
    match metric {
        Metric::Mse | Metric::Rmse => {
            let mse = sum(targets.iter().zip(raw).map(|(&y, &f)| (y - f) * (y - f))) / n;
            if metric == Metric::Rmse {
                mse.sqrt()
            } else {
                mse
            }
        }
        Metric::LogLoss => {
            sum(targets.iter().zip(raw).map(|(&y, &f)| {
                let p = clamped_proba(f);
                -(y * p.ln() + (F::one() - y) * (F::one() - p).ln())
            })) / n
        }
    }
}
