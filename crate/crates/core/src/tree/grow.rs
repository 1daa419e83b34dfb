use crate::dataset::{Column, Dataset};
use crate::num::{sum, Scalar};

use super::cv::select_split_cv;
use super::split::best_split_train;
use super::{child_ids, GrowthParams, Node, Selector, SplitCandidate, SplitKind, Tree, TreeError};

struct Grower<'a, F> {
    data: &'a Dataset<F>,
    targets: &'a [F],
    params: &'a GrowthParams,
    leaf_rows: Vec<Vec<usize>>,
}

impl<F: Scalar> Grower<'_, F> {
    fn select(&self, rows: &[usize], node_id: usize) -> Result<Option<SplitCandidate<F>>, TreeError> {
        match self.params.selector {
            Selector::TrainGain => {
                Ok(best_split_train(self.data, self.targets, rows, self.params.min_samples_leaf))
            }
            Selector::CrossValidated { .. } => {
                select_split_cv(self.data, self.targets, rows, self.params, node_id)
            }
        }
    }

    fn leaf(&mut self, rows: Vec<usize>, node_id: usize) -> Node<F> {
        let value = sum(rows.iter().map(|&i| self.targets[i])) / F::from_count(rows.len());
        let count = rows.len();
        self.leaf_rows.push(rows);
        Node::Leaf { node_id, value, count }
    }

    fn partition(&self, cand: &SplitCandidate<F>, rows: &[usize]) -> (Vec<usize>, Vec<usize>) {
        match (&cand.rule.kind, self.data.column(cand.rule.feature)) {
            (SplitKind::NumericThreshold(t), Column::Numeric(v)) => {
                rows.iter().partition(|&&i| v[i] <= *t)
            }
            (SplitKind::CategorySubset(set), Column::Categorical { codes, .. }) => {
                rows.iter().partition(|&&i| set.binary_search(&codes[i]).is_ok())
            }
            _ => unreachable!("split kind always matches its column type"),
        }
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, node_id: usize) -> Result<Node<F>, TreeError> {
        if depth >= self.params.max_depth || rows.len() < self.params.min_samples_split {
            return Ok(self.leaf(rows, node_id));
        }
        let Some(cand) = self.select(&rows, node_id)? else {
            return Ok(self.leaf(rows, node_id));
        };
        let (left_rows, right_rows) = self.partition(&cand, &rows);
        let min_leaf = self.params.min_samples_leaf.max(1);
        if left_rows.len() < min_leaf || right_rows.len() < min_leaf {
            return Ok(self.leaf(rows, node_id));
        }
        let cover = rows.len();
        let unseen_goes_left = left_rows.len() >= right_rows.len();
        let (left_id, right_id) = child_ids(node_id);
        let left = self.grow(left_rows, depth + 1, left_id)?;
        let right = self.grow(right_rows, depth + 1, right_id)?;
        Ok(Node::Internal {
            node_id,
            rule: cand.rule,
            gain: cand.gain,
            cover,
            unseen_goes_left,
            left: Box::new(left),
            right: Box::new(right),
        })
    }
}

/// Grows a tree and also returns the training rows of each leaf, in the
/// order of [`Tree::leaves`].
pub(crate) fn grow_tree_partitioned<F: Scalar>(
    data: &Dataset<F>,
    targets: &[F],
    rows: &[usize],
    params: &GrowthParams,
) -> Result<(Tree<F>, Vec<Vec<usize>>), TreeError> {
    params.validate()?;
    if rows.is_empty() {
        return Err(TreeError::EmptyNode);
    }
    assert_eq!(targets.len(), data.n_rows(), "one target per dataset row");
    let mut grower = Grower { data, targets, params, leaf_rows: Vec::new() };
    let root = grower.grow(rows.to_vec(), 0, 0)?;
    let tree = Tree { root, n_features: data.n_features(), cardinalities: data.cardinalities() };
    Ok((tree, grower.leaf_rows))
}

/// Recursively grows a regression tree on `targets` over the given rows.
/// Leaves hold the mean target; internal nodes record gain and cover.
pub fn grow_tree<F: Scalar>(
    data: &Dataset<F>,
    targets: &[F],
    rows: &[usize],
    params: &GrowthParams,
) -> Result<Tree<F>, TreeError> {
    grow_tree_partitioned(data, targets, rows, params).map(|(t, _)| t)
}
