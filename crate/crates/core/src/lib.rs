//! Gradient-boosted decision trees with two split-selection regimes:
//! classic training-gain CART search and cross-validated feature ranking
//! (CVB), plus the structural and permutation feature-importance measures
//! used to compare them and a harness for the bias simulations.
//!
//! The numerical core is generic over [`Scalar`] (split search, tree growth)
//! and [`Real`] (boosting, losses, importance). Concrete aliases for `f64`,
//! `f32` and exact rationals are exported below.

pub mod boosting;
pub mod dataset;
pub mod experiments;
pub mod importance;
pub mod num;
pub mod seed;
pub mod tree;

pub use boosting::{BoostError, BoostParams, Ensemble, Loss, Metric};
pub use dataset::{
    assign_folds, kfold_split, load_csv, Column, ColumnType, Dataset, DatasetError, FoldAssignment,
    Schema, Task,
};
pub use importance::{ImportanceError, ImportanceReport, Measure};
pub use num::{Rational, Real, Scalar};
pub use tree::{GrowthParams, Selector, SplitCandidate, SplitKind, SplitRule, Tree, TreeError};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type DatasetExact = Dataset<Rational>;

pub type Tree64 = Tree<f64>;
pub type Tree32 = Tree<f32>;
pub type TreeExact = Tree<Rational>;

pub type Ensemble64 = Ensemble<f64>;
pub type Ensemble32 = Ensemble<f32>;

pub type ImportanceReport64 = ImportanceReport<f64>;
