//! Binary regression trees over mixed numeric/categorical features.
//!
//! Two split selectors are supported: exhaustive training-gain search (CART)
//! and cross-validated feature ranking, where each feature is scored by the
//! held-out squared error of its best split across node-level folds and the
//! node stops growing when no feature beats the no-split impurity.

mod cv;
mod grow;
mod split;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Column, ColumnType, Dataset};
use crate::num::Scalar;

pub use cv::{cv_feature_ranks, cv_rank_feature, select_split_cv};
pub use grow::grow_tree;
pub(crate) use grow::grow_tree_partitioned;
pub use split::{
    best_categorical_split, best_numeric_split, best_split_for_feature, best_split_train, node_sse,
};

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("node has no rows")]
    EmptyNode,
    #[error("a fold's training complement is empty")]
    DegenerateFolds,
    #[error("row has {found} features, tree expects {expected}")]
    FeatureCountMismatch { expected: usize, found: usize },
    #[error("feature {feature} has the wrong type for this tree")]
    FeatureTypeMismatch { feature: usize },
    #[error("invalid growth parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SplitKind<F> {
    /// `value <= threshold` goes left.
    NumericThreshold(F),
    /// Codes in the (sorted) set go left.
    CategorySubset(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRule<F> {
    pub feature: usize,
    pub kind: SplitKind<F>,
}

/// A feature value presented to [`Tree::predict_row`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeatureValue<F> {
    Numeric(F),
    Category(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitCandidate<F> {
    pub rule: SplitRule<F>,
    pub gain: F,
    pub left_count: usize,
    pub right_count: usize,
    pub left_mean: F,
    pub right_mean: F,
}

impl<F> SplitCandidate<F> {
    pub(crate) fn on_feature(mut self, feature: usize) -> Self {
        self.rule.feature = feature;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node<F> {
    Leaf {
        node_id: usize,
        value: F,
        count: usize,
    },
    Internal {
        node_id: usize,
        rule: SplitRule<F>,
        gain: F,
        cover: usize,
        unseen_goes_left: bool,
        left: Box<Node<F>>,
        right: Box<Node<F>>,
    },
}

impl<F> Node<F> {
    pub fn node_id(&self) -> usize {
        match self {
            Node::Leaf { node_id, .. } | Node::Internal { node_id, .. } => *node_id,
        }
    }

    /// Training rows reaching this node.
    pub fn cover(&self) -> usize {
        match self {
            Node::Leaf { count, .. } => *count,
            Node::Internal { cover, .. } => *cover,
        }
    }
}

/// Heap numbering; keeps node ids independent of growth order.
pub(crate) fn child_ids(node_id: usize) -> (usize, usize) {
    let l = node_id.wrapping_mul(2).wrapping_add(1);
    (l, l.wrapping_add(1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Selector {
    TrainGain,
    CrossValidated { folds: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub selector: Selector,
    pub seed: u64,
    pub tree_idx: usize,
}

impl Default for GrowthParams {
    fn default() -> Self {
        GrowthParams::train_gain(3)
    }
}

impl GrowthParams {
    pub fn train_gain(max_depth: usize) -> Self {
        GrowthParams {
            max_depth,
            min_samples_split: 2,
            min_samples_leaf: 1,
            selector: Selector::TrainGain,
            seed: 0,
            tree_idx: 0,
        }
    }

    /// CV selector with `min_samples_split = 2 * folds`.
    pub fn cross_validated(max_depth: usize, folds: usize) -> Self {
        GrowthParams {
            min_samples_split: 2 * folds,
            selector: Selector::CrossValidated { folds },
            ..GrowthParams::train_gain(max_depth)
        }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        if self.min_samples_leaf == 0 {
            return Err(TreeError::InvalidParams("min_samples_leaf must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(TreeError::InvalidParams("min_samples_split must be at least 2".into()));
        }
        if let Selector::CrossValidated { folds } = self.selector {
            if folds < 2 {
                return Err(TreeError::InvalidParams("fold count must be at least 2".into()));
            }
            if self.min_samples_split < 2 * folds {
                return Err(TreeError::InvalidParams(format!(
                    "min_samples_split ({}) must be at least 2 x folds ({})",
                    self.min_samples_split,
                    2 * folds
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree<F> {
    pub root: Node<F>,
    pub n_features: usize,
    /// `Some(K)` for categorical features; codes `>= K` are unseen.
    pub cardinalities: Vec<Option<usize>>,
}

impl<F: Scalar> Tree<F> {
    pub fn is_stub(&self) -> bool {
        matches!(self.root, Node::Leaf { .. })
    }

    pub fn depth(&self) -> usize {
        fn go<F>(n: &Node<F>) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => 1 + go(left).max(go(right)),
            }
        }
        go(&self.root)
    }

    /// Internal nodes in depth-first (left before right) order.
    pub fn internal_nodes(&self) -> Vec<&Node<F>> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            if let Node::Internal { left, right, .. } = node {
                out.push(node);
                stack.push(right);
                stack.push(left);
            }
        }
        out
    }

    /// Leaves in depth-first (left before right) order.
    pub fn leaves(&self) -> Vec<&Node<F>> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            match node {
                Node::Leaf { .. } => out.push(node),
                Node::Internal { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    /// Visits leaf values in the same order as [`Tree::leaves`].
    pub fn for_each_leaf_mut(&mut self, mut f: impl FnMut(usize, &mut F)) {
        let mut idx = 0;
        let mut stack = vec![&mut self.root];
        while let Some(node) = stack.pop() {
            match node {
                Node::Leaf { value, .. } => {
                    f(idx, value);
                    idx += 1;
                }
                Node::Internal { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
    }

    fn categorical_left(&self, feature: usize, codes: &[u32], code: u32, unseen_left: bool) -> bool {
        match self.cardinalities[feature] {
            Some(k) if (code as usize) < k => codes.binary_search(&code).is_ok(),
            _ => unseen_left,
        }
    }

    pub fn predict_row(&self, row: &[FeatureValue<F>]) -> Result<F, TreeError> {
        if row.len() != self.n_features {
            return Err(TreeError::FeatureCountMismatch {
                expected: self.n_features,
                found: row.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { value, .. } => return Ok(*value),
                Node::Internal { rule, unseen_goes_left, left, right, .. } => {
                    let go_left = match (&rule.kind, row[rule.feature]) {
                        (SplitKind::NumericThreshold(t), FeatureValue::Numeric(v)) => v <= *t,
                        (SplitKind::CategorySubset(codes), FeatureValue::Category(c)) => {
                            self.categorical_left(rule.feature, codes, c, *unseen_goes_left)
                        }
                        _ => return Err(TreeError::FeatureTypeMismatch { feature: rule.feature }),
                    };
                    node = if go_left { left } else { right };
                }
            }
        }
    }

    /// Checks that every split in the tree matches the dataset's column types.
    pub fn check_compatible(&self, data: &Dataset<F>) -> Result<(), TreeError> {
        if data.n_features() != self.n_features {
            return Err(TreeError::FeatureCountMismatch {
                expected: self.n_features,
                found: data.n_features(),
            });
        }
        for node in self.internal_nodes() {
            if let Node::Internal { rule, .. } = node {
                let expected = match rule.kind {
                    SplitKind::NumericThreshold(_) => ColumnType::Numeric,
                    SplitKind::CategorySubset(_) => ColumnType::Categorical,
                };
                if data.column(rule.feature).column_type() != expected {
                    return Err(TreeError::FeatureTypeMismatch { feature: rule.feature });
                }
            }
        }
        Ok(())
    }

    /// Leaf reached by row `i` of a dataset already checked with
    /// [`Tree::check_compatible`].
    pub fn leaf_for(&self, data: &Dataset<F>, i: usize) -> &Node<F> {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { .. } => return node,
                Node::Internal { rule, unseen_goes_left, left, right, .. } => {
                    let go_left = match (&rule.kind, data.column(rule.feature)) {
                        (SplitKind::NumericThreshold(t), Column::Numeric(v)) => v[i] <= *t,
                        (SplitKind::CategorySubset(set), Column::Categorical { codes, .. }) => {
                            self.categorical_left(rule.feature, set, codes[i], *unseen_goes_left)
                        }
                        _ => panic!("tree/dataset type mismatch on feature {}", rule.feature),
                    };
                    node = if go_left { left } else { right };
                }
            }
        }
    }

    /// Prediction for row `i` of a dataset already checked with
    /// [`Tree::check_compatible`].
    pub fn predict_index(&self, data: &Dataset<F>, i: usize) -> F {
        match self.leaf_for(data, i) {
            Node::Leaf { value, .. } => *value,
            Node::Internal { .. } => unreachable!("leaf_for returns a leaf"),
        }
    }

    pub fn predict(&self, data: &Dataset<F>) -> Result<Vec<F>, TreeError> {
        self.check_compatible(data)?;
        Ok((0..data.n_rows()).map(|i| self.predict_index(data, i)).collect())
    }
}
