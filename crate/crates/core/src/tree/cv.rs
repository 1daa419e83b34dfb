//! Cross-validated feature ranking.
//!
//! The node's rows are split into `T` folds (one assignment per node, shared
//! by every feature). For each fold the feature's best split is fitted on
//! the other folds and the held-out rows are scored by squared error against
//! the fitted child means. Held-out rows that the fitted split cannot route
//! (a category absent from the training part, or no valid split at all) are
//! scored against the training-part mean. The rank is the sum over folds, so
//! each row contributes once and the rank is directly comparable to the
//! node's SSE.

use std::cmp::Ordering;

use crate::dataset::{assign_folds, Column, Dataset, DatasetError, FoldAssignment};
use crate::num::{sum, Scalar};

use super::split::{best_split_for_feature, code_stats, is_pure, node_sse, scan_categories, scan_sorted};
use super::{GrowthParams, Selector, SplitCandidate, SplitKind, TreeError};

fn check_folds(folds: &FoldAssignment, n: usize) -> Result<(), TreeError> {
    assert_eq!(folds.fold_of.len(), n, "fold assignment must cover the node rows");
    if folds.fold_sizes().iter().any(|&s| s >= n) {
        return Err(TreeError::DegenerateFolds);
    }
    Ok(())
}

fn sq<F: Scalar>(x: F) -> F {
    x * x
}

/// Numeric rank given local row order sorted by feature value.
fn rank_numeric<F: Scalar>(
    values: &[F],
    targets: &[F],
    sorted: &[usize],
    folds: &FoldAssignment,
    min_leaf: usize,
) -> F {
    let mut total = F::zero();
    let mut train: Vec<(F, F)> = Vec::with_capacity(sorted.len());
    for t in 0..folds.n_folds {
        train.clear();
        train.extend(sorted.iter().filter(|&&i| folds.fold_of[i] != t).map(|&i| (values[i], targets[i])));
        let train_mean = sum(train.iter().map(|p| p.1)) / F::from_count(train.len());
        let cand = scan_sorted(&train, min_leaf);
        let held_out = (0..values.len()).filter(|&i| folds.fold_of[i] == t);
        total = total
            + match &cand {
                Some(SplitCandidate { rule, left_mean, right_mean, .. }) => {
                    let SplitKind::NumericThreshold(thr) = rule.kind else { unreachable!() };
                    sum(held_out.map(|i| {
                        sq(targets[i] - if values[i] <= thr { *left_mean } else { *right_mean })
                    }))
                }
                None => sum(held_out.map(|i| sq(targets[i] - train_mean))),
            };
    }
    total
}

fn rank_categorical<F: Scalar>(
    codes: &[u32],
    targets: &[F],
    folds: &FoldAssignment,
    min_leaf: usize,
) -> F {
    let mut total = F::zero();
    for t in 0..folds.n_folds {
        let train = (0..codes.len()).filter(|&i| folds.fold_of[i] != t).map(|i| (codes[i], targets[i]));
        let (stats, n, raw_total) = code_stats(train);
        let train_mean = raw_total / F::from_count(n);
        let cand = scan_categories(&stats, n, raw_total, min_leaf);
        let seen = |c: u32| stats.get(c as usize).is_some_and(|s| s.count > 0);
        let held_out = (0..codes.len()).filter(|&i| folds.fold_of[i] == t);
        total = total
            + match &cand {
                Some(SplitCandidate { rule, left_mean, right_mean, .. }) => {
                    let SplitKind::CategorySubset(left) = &rule.kind else { unreachable!() };
                    sum(held_out.map(|i| {
                        let c = codes[i];
                        let pred = if !seen(c) {
                            train_mean
                        } else if left.binary_search(&c).is_ok() {
                            *left_mean
                        } else {
                            *right_mean
                        };
                        sq(targets[i] - pred)
                    }))
                }
                None => sum(held_out.map(|i| sq(targets[i] - train_mean))),
            };
    }
    total
}

fn sorted_order<F: Scalar>(values: &[F]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    order
}

fn rank_local<F: Scalar>(
    data: &Dataset<F>,
    rows: &[usize],
    local_targets: &[F],
    feature: usize,
    folds: &FoldAssignment,
    min_leaf: usize,
) -> F {
    match data.column(feature) {
        Column::Numeric(v) => {
            let values: Vec<F> = rows.iter().map(|&i| v[i]).collect();
            let order = sorted_order(&values);
            rank_numeric(&values, local_targets, &order, folds, min_leaf)
        }
        Column::Categorical { codes, .. } => {
            let local: Vec<u32> = rows.iter().map(|&i| codes[i]).collect();
            rank_categorical(&local, local_targets, folds, min_leaf)
        }
    }
}

/// Held-out squared error of `feature` summed over the folds.
/// `folds.fold_of[k]` is the fold of `rows[k]`.
pub fn cv_rank_feature<F: Scalar>(
    data: &Dataset<F>,
    targets: &[F],
    rows: &[usize],
    feature: usize,
    folds: &FoldAssignment,
    min_leaf: usize,
) -> Result<F, TreeError> {
    check_folds(folds, rows.len())?;
    let local: Vec<F> = rows.iter().map(|&i| targets[i]).collect();
    Ok(rank_local(data, rows, &local, feature, folds, min_leaf))
}

/// Ranks for every feature under one shared fold assignment.
pub fn cv_feature_ranks<F: Scalar>(
    data: &Dataset<F>,
    targets: &[F],
    rows: &[usize],
    folds: &FoldAssignment,
    min_leaf: usize,
) -> Result<Vec<F>, TreeError> {
    check_folds(folds, rows.len())?;
    let local: Vec<F> = rows.iter().map(|&i| targets[i]).collect();
    Ok((0..data.n_features())
        .map(|j| rank_local(data, rows, &local, j, folds, min_leaf))
        .collect())
}

/// Cross-validated split selection for one node.
///
/// Returns `None` when the lowest rank is not below the node SSE; otherwise
/// the winning feature is re-split on all node rows by training gain.
pub fn select_split_cv<F: Scalar>(
    data: &Dataset<F>,
    targets: &[F],
    rows: &[usize],
    params: &GrowthParams,
    node_id: usize,
) -> Result<Option<SplitCandidate<F>>, TreeError> {
    let Selector::CrossValidated { folds: n_folds } = params.selector else {
        return Err(TreeError::InvalidParams("select_split_cv needs the cross-validated selector".into()));
    };
    if rows.is_empty() {
        return Err(TreeError::EmptyNode);
    }
    if is_pure(targets, rows) {
        return Ok(None);
    }
    let folds = assign_folds(rows.len(), n_folds, params.seed, params.tree_idx, node_id).map_err(
        |e| match e {
            DatasetError::TooFewRows { .. } => TreeError::DegenerateFolds,
            other => TreeError::InvalidParams(other.to_string()),
        },
    )?;
    let ranks = cv_feature_ranks(data, targets, rows, &folds, params.min_samples_leaf)?;
    let Some((winner, min_rank)) = ranks
        .iter()
        .copied()
        .enumerate()
        .fold(None::<(usize, F)>, |best, (j, r)| match best {
            Some((_, b)) if r >= b => best,
            _ => Some((j, r)),
        })
    else {
        return Ok(None);
    };
    let local: Vec<F> = rows.iter().map(|&i| targets[i]).collect();
    if min_rank >= node_sse(&local)? {
        return Ok(None);
    }
    Ok(best_split_for_feature(data, targets, rows, winner, params.min_samples_leaf))
}
