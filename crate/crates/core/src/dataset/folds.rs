use rand::seq::SliceRandom;

use crate::num::Scalar;
use crate::seed::rng_for;

use super::{Dataset, DatasetError};

// Stream tags keep node-level and dataset-level shuffles independent.
const NODE_FOLDS: u64 = 0x4e4f4445;
const KFOLD: u64 = 0x4b464f4c;

/// Partition of `n` local row indices into `n_folds` near-equal folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    pub fold_of: Vec<usize>,
    pub n_folds: usize,
}

impl FoldAssignment {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffled near-equal partition, fully determined by
/// `(seed, tree_idx, node_id)`.
pub fn assign_folds(
    n: usize,
    n_folds: usize,
    seed: u64,
    tree_idx: usize,
    node_id: usize,
) -> Result<FoldAssignment, DatasetError> {
    if n_folds < 2 {
        return Err(DatasetError::InvalidFoldCount(n_folds));
    }
    if n < n_folds {
        return Err(DatasetError::TooFewRows { rows: n, folds: n_folds });
    }
    let mut fold_of: Vec<usize> = (0..n).map(|i| i % n_folds).collect();
    let mut rng = rng_for(&[NODE_FOLDS, seed, tree_idx as u64, node_id as u64]);
    fold_of.shuffle(&mut rng);
    Ok(FoldAssignment { fold_of, n_folds })
}

/// `(train, test)` row indices for K-fold evaluation. Test folds are
/// disjoint, cover every row once, and are listed in ascending row order.
pub fn kfold_indices(
    n: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>, DatasetError> {
    let folds = assign_folds(n, k, seed ^ KFOLD, 0, 0)?;
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&i| folds.fold_of[i] == f);
            (train, test)
        })
        .collect())
}

/// K-fold train/test datasets. Training dictionaries are compacted to the
/// labels present in the training part and the test part is encoded against
/// them, so labels only seen at test time map to UNSEEN.
pub fn kfold_split<F: Scalar>(
    data: &Dataset<F>,
    k: usize,
    seed: u64,
) -> Result<Vec<(Dataset<F>, Dataset<F>)>, DatasetError> {
    Ok(kfold_indices(data.n_rows(), k, seed)?
        .into_iter()
        .map(|(train, test)| {
            let train = data.subset(&train).compact_dictionaries();
            let test = data.subset(&test).encode_unseen(&train.dictionaries());
            (train, test)
        })
        .collect())
}
