//! Global feature importance: Gain, Split count, Cover and Permutation FI.
//!
//! Every report carries raw scores and scaled scores (raw / sum, or all zeros
//! when nothing has positive mass). Negative permutation scores are clipped
//! to zero before scaling; the signed means are kept in the metadata.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::boosting::{BoostError, Ensemble, Metric};
use crate::dataset::{Column, Dataset};
use crate::num::{sum, Real};
use crate::seed::rng_for;
use crate::tree::Node;

const PFI_STREAM: u64 = 0x50464931;

#[derive(Debug, Error)]
pub enum ImportanceError {
    #[error("importance scores must be non-negative before scaling")]
    NegativeInput,
    #[error("metric {metric:?} cannot evaluate this model")]
    MetricIncompatible { metric: Metric },
    #[error("n_permutations must be at least 1")]
    NoPermutations,
    #[error(transparent)]
    Boost(BoostError),
}

impl From<BoostError> for ImportanceError {
    fn from(e: BoostError) -> Self {
        match e {
            BoostError::WrongMetric { metric, .. } => ImportanceError::MetricIncompatible { metric },
            other => ImportanceError::Boost(other),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "gain")]
    Gain,
    #[serde(rename = "split-count")]
    SplitCount,
    #[serde(rename = "cover")]
    Cover,
    #[serde(rename = "pfi")]
    Pfi,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Gain => "gain",
            Measure::SplitCount => "split-count",
            Measure::Cover => "cover",
            Measure::Pfi => "pfi",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSet {
    Train,
    Test,
}

impl EvalSet {
    pub fn name(self) -> &'static str {
        match self {
            EvalSet::Train => "train",
            EvalSet::Test => "test",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceMeta<F> {
    pub n_permutations: Option<usize>,
    pub evaluation_set: Option<EvalSet>,
    pub metric: Option<Metric>,
    /// Per-feature standard deviation of the error increase across permutations.
    pub std: Option<Vec<F>>,
    /// Per-feature mean error increase before clipping.
    pub signed_raw: Option<Vec<F>>,
}

impl<F> Default for ImportanceMeta<F> {
    fn default() -> Self {
        ImportanceMeta { n_permutations: None, evaluation_set: None, metric: None, std: None, signed_raw: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceReport<F> {
    pub measure: Measure,
    pub feature_names: Vec<String>,
    pub raw: Vec<F>,
    pub scaled: Vec<F>,
    pub meta: ImportanceMeta<F>,
}

/// `raw / sum(raw)`, or all zeros when the sum is zero.
pub fn scale_importance<F: Real>(raw: &[F]) -> Result<Vec<F>, ImportanceError> {
    if raw.iter().any(|&v| v < F::zero()) {
        return Err(ImportanceError::NegativeInput);
    }
    let total = sum(raw.iter().copied());
    if total == F::zero() {
        return Ok(vec![F::zero(); raw.len()]);
    }
    Ok(raw.iter().map(|&v| v / total).collect())
}

fn structural<F: Real>(
    ensemble: &Ensemble<F>,
    measure: Measure,
    per_node: impl Fn(&Node<F>) -> F,
) -> ImportanceReport<F> {
    let mut raw = vec![F::zero(); ensemble.n_features()];
    for tree in &ensemble.trees {
        for node in tree.internal_nodes() {
            if let Node::Internal { rule, .. } = node {
                raw[rule.feature] = raw[rule.feature] + per_node(node);
            }
        }
    }
    if measure == Measure::Gain && !ensemble.trees.is_empty() {
        let n = F::from_count(ensemble.trees.len());
        raw.iter_mut().for_each(|v| *v = *v / n);
    }
    let scaled = scale_importance(&raw).expect("structural scores are non-negative");
    ImportanceReport {
        measure,
        feature_names: ensemble.feature_names(),
        raw,
        scaled,
        meta: ImportanceMeta::default(),
    }
}

/// Sum of split gains per feature within each tree, averaged over trees.
pub fn gain_importance<F: Real>(ensemble: &Ensemble<F>) -> ImportanceReport<F> {
    structural(ensemble, Measure::Gain, |n| match n {
        Node::Internal { gain, .. } => *gain,
        Node::Leaf { .. } => F::zero(),
    })
}

/// Number of internal nodes splitting on each feature, over all trees.
pub fn split_count_importance<F: Real>(ensemble: &Ensemble<F>) -> ImportanceReport<F> {
    structural(ensemble, Measure::SplitCount, |_| F::one())
}

/// Training rows passing through splits on each feature, over all trees.
pub fn cover_importance<F: Real>(ensemble: &Ensemble<F>) -> ImportanceReport<F> {
    structural(ensemble, Measure::Cover, |n| F::from_count(n.cover()))
}

fn permuted_column<F: Real>(column: &Column<F>, seed: u64, feature: usize, rep: usize) -> Column<F> {
    use rand::seq::SliceRandom;
    let mut rng = rng_for(&[PFI_STREAM, seed, feature as u64, rep as u64]);
    match column {
        Column::Numeric(v) => {
            let mut v = v.clone();
            v.shuffle(&mut rng);
            Column::Numeric(v)
        }
        Column::Categorical { codes, labels } => {
            let mut codes = codes.clone();
            codes.shuffle(&mut rng);
            Column::Categorical { codes, labels: labels.clone() }
        }
    }
}

/// Permutation importance: mean increase of `metric` after shuffling each
/// feature column, over `n_permutations` seeded shuffles. `data` must be
/// encoded with the model's dictionaries (see [`Ensemble::prepare`]).
pub fn permutation_importance<F: Real>(
    ensemble: &Ensemble<F>,
    data: &Dataset<F>,
    n_permutations: usize,
    metric: Metric,
    seed: u64,
    evaluation_set: EvalSet,
) -> Result<ImportanceReport<F>, ImportanceError> {
    if n_permutations == 0 {
        return Err(ImportanceError::NoPermutations);
    }
    let baseline = ensemble.evaluate(data, metric)?;
    let p = ensemble.n_features();
    let deltas: Vec<F> = (0..p * n_permutations)
        .into_par_iter()
        .map(|cell| {
            let (j, r) = (cell / n_permutations, cell % n_permutations);
            let shuffled = data.with_column(j, permuted_column(data.column(j), seed, j, r));
            ensemble.evaluate(&shuffled, metric).map(|err| err - baseline)
        })
        .collect::<Result<_, _>>()?;

    let reps = F::from_count(n_permutations);
    let mut signed = Vec::with_capacity(p);
    let mut std = Vec::with_capacity(p);
    for chunk in deltas.chunks(n_permutations) {
        let mean = sum(chunk.iter().copied()) / reps;
        let var = if n_permutations > 1 {
            sum(chunk.iter().map(|&d| (d - mean) * (d - mean))) / F::from_count(n_permutations - 1)
        } else {
            F::zero()
        };
        signed.push(mean);
        std.push(var.sqrt());
    }
    let raw: Vec<F> = signed.iter().map(|&v| v.max(F::zero())).collect();
    let scaled = scale_importance(&raw)?;
    Ok(ImportanceReport {
        measure: Measure::Pfi,
        feature_names: ensemble.feature_names(),
        raw,
        scaled,
        meta: ImportanceMeta {
            n_permutations: Some(n_permutations),
            evaluation_set: Some(evaluation_set),
            metric: Some(metric),
            std: Some(std),
            signed_raw: Some(signed),
        },
    })
}

impl<F: Real> ImportanceReport<F> {
    pub const CSV_HEADER: [&'static str; 6] = ["measure", "feature", "raw", "scaled", "std", "evaluation_set"];

    /// Rows matching [`ImportanceReport::CSV_HEADER`].
    pub fn csv_rows(&self) -> Vec<[String; 6]> {
        (0..self.raw.len())
            .map(|j| {
                [
                    self.measure.name().to_string(),
                    self.feature_names[j].clone(),
                    self.raw[j].to_string(),
                    self.scaled[j].to_string(),
                    self.meta.std.as_ref().map(|s| s[j].to_string()).unwrap_or_default(),
                    self.meta.evaluation_set.map(|e| e.name().to_string()).unwrap_or_default(),
                ]
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "measure": self.measure,
            "n_permutations": self.meta.n_permutations,
            "evaluation_set": self.meta.evaluation_set,
            "metric": self.meta.metric,
            "features": (0..self.raw.len()).map(|j| json!({
                "feature": self.feature_names[j],
                "raw": self.raw[j],
                "scaled": self.scaled[j],
                "std": self.meta.std.as_ref().map(|s| s[j]),
                "signed_raw": self.meta.signed_raw.as_ref().map(|s| s[j]),
            })).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boosting::{FeatureMeta, Loss};
    use crate::dataset::{ColumnType, Task};
    use crate::tree::{SplitKind, SplitRule, Tree};

    #[test]
    fn scaling_examples() {
        assert_eq!(scale_importance(&[2.0, 1.0, 1.0]).unwrap(), vec![0.5, 0.25, 0.25]);
        assert_eq!(scale_importance(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(scale_importance(&[5.0]).unwrap(), vec![1.0]);
        assert!(matches!(scale_importance(&[1.0, -0.5]), Err(ImportanceError::NegativeInput)));
    }

    fn leaf(id: usize, count: usize) -> Box<Node<f64>> {
        Box::new(Node::Leaf { node_id: id, value: 0.0, count })
    }

    fn split(id: usize, feature: usize, gain: f64, left: Box<Node<f64>>, right: Box<Node<f64>>) -> Box<Node<f64>> {
        let cover = left.cover() + right.cover();
        Box::new(Node::Internal {
            node_id: id,
            rule: SplitRule { feature, kind: SplitKind::NumericThreshold(0.0) },
            gain,
            cover,
            unseen_goes_left: true,
            left,
            right,
        })
    }

    fn model(roots: Vec<Box<Node<f64>>>, p: usize) -> Ensemble<f64> {
        Ensemble {
            f0: 0.0,
            trees: roots
                .into_iter()
                .map(|r| Tree { root: *r, n_features: p, cardinalities: vec![None; p] })
                .collect(),
            learning_rate: 0.1,
            loss: Loss::SquaredError,
            task: Task::Regression,
            features: (0..p)
                .map(|j| FeatureMeta { name: format!("x{j}"), column_type: ColumnType::Numeric, dictionary: None })
                .collect(),
            target_name: "y".into(),
            n_trees_budget: 10,
        }
    }

    #[test]
    fn single_split_is_one_hot() {
        let m = model(vec![split(0, 3, 2.5, leaf(1, 4), leaf(2, 6))], 5);
        let g = gain_importance(&m);
        assert_eq!(g.raw, vec![0.0, 0.0, 0.0, 2.5, 0.0]);
        assert_eq!(g.scaled, vec![0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(split_count_importance(&m).raw[3], 1.0);
        assert_eq!(cover_importance(&m).raw[3], 10.0);
    }

    #[test]
    fn stub_only_ensemble_scores_zero() {
        let m = model(vec![], 3);
        for r in [gain_importance(&m), split_count_importance(&m), cover_importance(&m)] {
            assert_eq!(r.raw, vec![0.0; 3]);
            assert_eq!(r.scaled, vec![0.0; 3]);
        }
    }

    #[test]
    fn cover_is_additive_over_children() {
        let root = split(0, 0, 1.0, split(1, 1, 0.5, leaf(3, 25), leaf(4, 25)), split(2, 1, 0.5, leaf(5, 25), leaf(6, 25)));
        let m = model(vec![root], 2);
        assert_eq!(cover_importance(&m).raw, vec![100.0, 100.0]);
        assert_eq!(split_count_importance(&m).raw, vec![1.0, 2.0]);
    }

    #[test]
    fn gain_is_averaged_over_trees() {
        let m = model(vec![split(0, 0, 4.0, leaf(1, 1), leaf(2, 1)), split(0, 1, 2.0, leaf(1, 1), leaf(2, 1))], 2);
        assert_eq!(gain_importance(&m).raw, vec![2.0, 1.0]);
    }

    #[test]
    fn clipping_before_scaling() {
        let raw: Vec<f64> = [-0.01, 0.03].iter().map(|v: &f64| v.max(0.0)).collect();
        assert_eq!(raw, vec![0.0, 0.03]);
        assert_eq!(scale_importance(&raw).unwrap(), vec![0.0, 1.0]);
    }
}
