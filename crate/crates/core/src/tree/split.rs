//! Exhaustive split search under squared-error impurity.
//!
//! Gains are computed from sums of node-centered targets:
//! `gain = S_L^2 / n_L + S_R^2 / n_R - S^2 / n`, which equals the node SSE
//! minus the children's SSE. Centering keeps the float path well conditioned
//! and the rational path exact.

use std::cmp::Ordering;

use crate::dataset::{Column, Dataset};
use crate::num::{sum, Scalar};

use super::{SplitCandidate, SplitKind, SplitRule, TreeError};

/// Sum of squared deviations from the mean.
pub fn node_sse<F: Scalar>(targets: &[F]) -> Result<F, TreeError> {
    if targets.is_empty() {
        return Err(TreeError::EmptyNode);
    }
    let mean = sum(targets.iter().copied()) / F::from_count(targets.len());
    Ok(sum(targets.iter().map(|&y| (y - mean) * (y - mean))))
}

pub(crate) fn cut_gain<F: Scalar>(left_sum: F, left_n: usize, total_sum: F, n: usize) -> F {
    let right_sum = total_sum - left_sum;
    let g = left_sum * left_sum / F::from_count(left_n)
        + right_sum * right_sum / F::from_count(n - left_n)
        - total_sum * total_sum / F::from_count(n);
    g.max_of(F::zero())
}

fn midpoint<F: Scalar>(lo: F, hi: F) -> F {
    let mid = (lo + hi) * F::half();
    // adjacent floats can round the midpoint up onto `hi`
    if mid < hi && mid >= lo {
        mid
    } else {
        lo
    }
}

fn by_value<F: Scalar>(a: &F, b: &F) -> Ordering {
    a.partial_cmp(b).expect("feature values must be comparable")
}

/// Best threshold over `(value, target)` pairs already sorted by value.
/// Ties go to the smallest threshold.
pub(crate) fn scan_sorted<F: Scalar>(sorted: &[(F, F)], min_leaf: usize) -> Option<SplitCandidate<F>> {
    let n = sorted.len();
    if n < 2 {
        return None;
    }
    let raw_total = sum(sorted.iter().map(|p| p.1));
    let mean = raw_total / F::from_count(n);
    let centered_total = sum(sorted.iter().map(|p| p.1 - mean));

    let mut best: Option<(usize, F, F)> = None; // (left_n, gain, left raw sum)
    let mut left_centered = F::zero();
    let mut left_raw = F::zero();
    for i in 1..n {
        left_centered = left_centered + (sorted[i - 1].1 - mean);
        left_raw = left_raw + sorted[i - 1].1;
        if sorted[i - 1].0 == sorted[i].0 || i < min_leaf || n - i < min_leaf {
            continue;
        }
        let gain = cut_gain(left_centered, i, centered_total, n);
        if best.as_ref().is_none_or(|b| gain > b.1) {
            best = Some((i, gain, left_raw));
        }
    }
    let (left_n, gain, left_raw) = best?;
    Some(SplitCandidate {
        rule: SplitRule {
            feature: 0,
            kind: SplitKind::NumericThreshold(midpoint(sorted[left_n - 1].0, sorted[left_n].0)),
        },
        gain,
        left_count: left_n,
        right_count: n - left_n,
        left_mean: left_raw / F::from_count(left_n),
        right_mean: (raw_total - left_raw) / F::from_count(n - left_n),
    })
}

/// Best numeric threshold (midpoints between consecutive distinct values).
/// `rule.feature` is left at 0.
pub fn best_numeric_split<F: Scalar>(
    values: &[F],
    targets: &[F],
    min_leaf: usize,
) -> Option<SplitCandidate<F>> {
    assert_eq!(values.len(), targets.len());
    let mut pairs: Vec<(F, F)> = values.iter().copied().zip(targets.iter().copied()).collect();
    pairs.sort_by(|a, b| by_value(&a.0, &b.0));
    scan_sorted(&pairs, min_leaf)
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CodeStats<F> {
    pub count: usize,
    pub raw: F,
    pub centered: F,
}

/// Per-code counts and target sums over `(code, target)` pairs.
pub(crate) fn code_stats<F: Scalar, I>(pairs: I) -> (Vec<CodeStats<F>>, usize, F)
where
    I: Iterator<Item = (u32, F)> + Clone,
{
    let (n, raw_total) = pairs.clone().fold((0usize, F::zero()), |(n, s), (_, y)| (n + 1, s + y));
    let mean = if n > 0 { raw_total / F::from_count(n) } else { F::zero() };
    let mut stats: Vec<CodeStats<F>> = Vec::new();
    for (code, y) in pairs {
        let c = code as usize;
        if c >= stats.len() {
            stats.resize(c + 1, CodeStats { count: 0, raw: F::zero(), centered: F::zero() });
        }
        let s = &mut stats[c];
        s.count += 1;
        s.raw = s.raw + y;
        s.centered = s.centered + (y - mean);
    }
    (stats, n, raw_total)
}

/// Mean-sorted prefix search over the categories present in `stats`.
/// Ties go to the shortest prefix.
pub(crate) fn scan_categories<F: Scalar>(
    stats: &[CodeStats<F>],
    n: usize,
    raw_total: F,
    min_leaf: usize,
) -> Option<SplitCandidate<F>> {
    let mut present: Vec<u32> = (0..stats.len() as u32).filter(|&c| stats[c as usize].count > 0).collect();
    if present.len() < 2 {
        return None;
    }
    let mean_of = |c: u32| {
        let s = &stats[c as usize];
        s.centered / F::from_count(s.count)
    };
    present.sort_by(|&a, &b| by_value(&mean_of(a), &mean_of(b)).then(a.cmp(&b)));
    let centered_total = sum(present.iter().map(|&c| stats[c as usize].centered));

    let mut best: Option<(usize, usize, F, F)> = None; // (prefix len, left_n, gain, left raw)
    let (mut left_n, mut left_centered, mut left_raw) = (0usize, F::zero(), F::zero());
    for (k, &code) in present.iter().enumerate().take(present.len() - 1) {
        let s = &stats[code as usize];
        left_n += s.count;
        left_centered = left_centered + s.centered;
        left_raw = left_raw + s.raw;
        if left_n < min_leaf || n - left_n < min_leaf {
            continue;
        }
        let gain = cut_gain(left_centered, left_n, centered_total, n);
        if best.as_ref().is_none_or(|b| gain > b.2) {
            best = Some((k + 1, left_n, gain, left_raw));
        }
    }
    let (prefix, left_n, gain, left_raw) = best?;
    let mut left_codes = present[..prefix].to_vec();
    left_codes.sort_unstable();
    Some(SplitCandidate {
        rule: SplitRule { feature: 0, kind: SplitKind::CategorySubset(left_codes) },
        gain,
        left_count: left_n,
        right_count: n - left_n,
        left_mean: left_raw / F::from_count(left_n),
        right_mean: (raw_total - left_raw) / F::from_count(n - left_n),
    })
}

/// Best category-subset split: categories are ordered by mean target and
/// only the `K' - 1` prefix cuts of that order are scored.
/// `rule.feature` is left at 0.
pub fn best_categorical_split<F: Scalar>(
    codes: &[u32],
    targets: &[F],
    min_leaf: usize,
) -> Option<SplitCandidate<F>> {
    assert_eq!(codes.len(), targets.len());
    let pairs = codes.iter().copied().zip(targets.iter().copied());
    let (stats, n, raw_total) = code_stats(pairs);
    scan_categories(&stats, n, raw_total, min_leaf)
}

/// Best split on one feature over the node `rows`.
pub fn best_split_for_feature<F: Scalar>(
    data: &Dataset<F>,
    targets: &[F],
    rows: &[usize],
    feature: usize,
    min_leaf: usize,
) -> Option<SplitCandidate<F>> {
    let cand = match data.column(feature) {
        Column::Numeric(values) => {
            let mut pairs: Vec<(F, F)> = rows.iter().map(|&i| (values[i], targets[i])).collect();
            pairs.sort_by(|a, b| by_value(&a.0, &b.0));
            scan_sorted(&pairs, min_leaf)
        }
        Column::Categorical { codes, .. } => {
            let (stats, n, raw_total) = code_stats(rows.iter().map(|&i| (codes[i], targets[i])));
            scan_categories(&stats, n, raw_total, min_leaf)
        }
    };
    cand.map(|c| c.on_feature(feature))
}

pub(crate) fn is_pure<F: Scalar>(targets: &[F], rows: &[usize]) -> bool {
    rows.first().is_none_or(|&r0| rows.iter().all(|&i| targets[i] == targets[r0]))
}

/// Training-gain selection: highest gain across features, lowest feature
/// index on ties; `None` unless some gain is strictly positive.
pub fn best_split_train<F: Scalar>(
    data: &Dataset<F>,
    targets: &[F],
    rows: &[usize],
    min_leaf: usize,
) -> Option<SplitCandidate<F>> {
    if rows.len() < 2 || is_pure(targets, rows) {
        return None;
    }
    let mut best: Option<SplitCandidate<F>> = None;
    for j in 0..data.n_features() {
        if let Some(c) = best_split_for_feature(data, targets, rows, j, min_leaf) {
            if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                best = Some(c);
            }
        }
    }
    best.filter(|c| c.gain > F::zero())
}
