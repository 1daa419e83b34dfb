//! Columnar data model: typed feature columns, CSV ingestion against a JSON
//! schema, categorical encoding and deterministic fold assignment.
//!
//! Categorical columns store dense integer codes plus the code → label
//! dictionary. A code equal to the dictionary length is the UNSEEN sentinel
//! produced by [`Dataset::encode_unseen`] for labels the training data never
//! contained.

mod csv_io;
mod folds;
mod schema;

use std::collections::HashMap;

use thiserror::Error;

use crate::num::Scalar;

pub use csv_io::{load_csv, load_csv_features, read_schema, write_csv};
pub use folds::{assign_folds, kfold_indices, kfold_split, FoldAssignment};
pub use schema::{ColumnType, Schema, Task};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed schema: {0}")]
    MalformedSchema(String),
    #[error("column `{0}` is missing from the data")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a finite number")]
    UnparseableNumeric { row: usize, column: String, value: String },
    #[error("row {row}, column `{column}`: missing value")]
    MissingValue { row: usize, column: String },
    #[error("row {row}: binary target must be 0 or 1, found {value}")]
    NonBinaryTarget { row: usize, value: f64 },
    #[error("cannot build {folds} folds from {rows} rows")]
    TooFewRows { rows: usize, folds: usize },
    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("column `{column}` has length {found}, expected {expected}")]
    LengthMismatch { column: String, expected: usize, found: usize },
    #[error("column `{column}`: code {code} outside dictionary of size {cardinality}")]
    InvalidCode { column: String, code: u32, cardinality: usize },
    #[error("target value {value} at row {row} is not positive; cannot take a logarithm")]
    NonPositiveTarget { row: usize, value: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Column<F> {
    Numeric(Vec<F>),
    /// `labels[code]` is the original label of `code`.
    Categorical { codes: Vec<u32>, labels: Vec<String> },
}

impl<F> Column<F> {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column_type(&self) -> ColumnType {
        match self {
            Column::Numeric(_) => ColumnType::Numeric,
            Column::Categorical { .. } => ColumnType::Categorical,
        }
    }

    /// Number of categories K for categorical columns.
    pub fn cardinality(&self) -> Option<usize> {
        match self {
            Column::Numeric(_) => None,
            Column::Categorical { labels, .. } => Some(labels.len()),
        }
    }

    fn select(&self, rows: &[usize]) -> Column<F>
    where
        F: Copy,
    {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&i| v[i]).collect()),
            Column::Categorical { codes, labels } => Column::Categorical {
                codes: rows.iter().map(|&i| codes[i]).collect(),
                labels: labels.clone(),
            },
        }
    }
}

/// Immutable column-typed table plus a real-valued target.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<F> {
    names: Vec<String>,
    columns: Vec<Column<F>>,
    target: Vec<F>,
    target_name: String,
    task: Task,
}

impl<F: Scalar> Dataset<F> {
    pub fn new(
        names: Vec<String>,
        columns: Vec<Column<F>>,
        target: Vec<F>,
        target_name: impl Into<String>,
        task: Task,
    ) -> Result<Self, DatasetError> {
        assert_eq!(names.len(), columns.len(), "one name per column");
        let n = target.len();
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(DatasetError::LengthMismatch {
                    column: name.clone(),
                    expected: n,
                    found: col.len(),
                });
            }
            if let Column::Categorical { codes, labels } = col {
                // the UNSEEN sentinel (== labels.len()) is allowed
                if let Some(&code) = codes.iter().find(|&&c| c as usize > labels.len()) {
                    return Err(DatasetError::InvalidCode {
                        column: name.clone(),
                        code,
                        cardinality: labels.len(),
                    });
                }
            }
        }
        if task == Task::BinaryClassification {
            if let Some((row, y)) = target
                .iter()
                .enumerate()
                .find(|(_, &y)| y != F::zero() && y != F::one())
            {
                return Err(DatasetError::NonBinaryTarget { row: row + 1, value: y.as_f64() });
            }
        }
        Ok(Dataset { names, columns, target, target_name: target_name.into(), task })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> &Column<F> {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Column<F>] {
        &self.columns
    }

    pub fn target(&self) -> &[F] {
        &self.target
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn cardinalities(&self) -> Vec<Option<usize>> {
        self.columns.iter().map(Column::cardinality).collect()
    }

    /// Per-feature code → label maps (`None` for numeric columns).
    pub fn dictionaries(&self) -> Vec<Option<Vec<String>>> {
        self.columns
            .iter()
            .map(|c| match c {
                Column::Numeric(_) => None,
                Column::Categorical { labels, .. } => Some(labels.clone()),
            })
            .collect()
    }

    /// Rows in the given order; dictionaries are kept unchanged.
    pub fn subset(&self, rows: &[usize]) -> Self {
        Dataset {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            target: rows.iter().map(|&i| self.target[i]).collect(),
            target_name: self.target_name.clone(),
            task: self.task,
        }
    }

    /// Re-encodes every categorical column so that only labels present in
    /// this dataset remain, numbered in first-appearance order.
    pub fn compact_dictionaries(&self) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Numeric(v) => Column::Numeric(v.clone()),
                Column::Categorical { codes, labels } => {
                    let mut remap: HashMap<u32, u32> = HashMap::new();
                    let mut new_labels = Vec::new();
                    let new_codes = codes
                        .iter()
                        .map(|&c| {
                            *remap.entry(c).or_insert_with(|| {
                                new_labels.push(
                                    labels.get(c as usize).cloned().unwrap_or_default(),
                                );
                                (new_labels.len() - 1) as u32
                            })
                        })
                        .collect();
                    Column::Categorical { codes: new_codes, labels: new_labels }
                }
            })
            .collect();
        Dataset { columns, ..self.clone() }
    }

    /// Re-encodes categorical labels against training dictionaries. Labels
    /// absent from a training dictionary get the UNSEEN code `K_j`.
    pub fn encode_unseen(&self, train_dictionaries: &[Option<Vec<String>>]) -> Self {
        assert_eq!(train_dictionaries.len(), self.n_features(), "dictionary per feature");
        let columns = self
            .columns
            .iter()
            .zip(train_dictionaries)
            .map(|(c, dict)| match (c, dict) {
                (Column::Categorical { codes, labels }, Some(train)) => {
                    let lookup: HashMap<&str, u32> =
                        train.iter().enumerate().map(|(i, l)| (l.as_str(), i as u32)).collect();
                    let unseen = train.len() as u32;
                    let translated: Vec<u32> = labels
                        .iter()
                        .map(|l| lookup.get(l.as_str()).copied().unwrap_or(unseen))
                        .collect();
                    Column::Categorical {
                        codes: codes
                            .iter()
                            .map(|&c| translated.get(c as usize).copied().unwrap_or(unseen))
                            .collect(),
                        labels: train.clone(),
                    }
                }
                (other, _) => other.clone(),
            })
            .collect();
        Dataset { columns, ..self.clone() }
    }

    pub fn with_target(&self, target: Vec<F>) -> Self {
        assert_eq!(target.len(), self.n_rows());
        Dataset { target, ..self.clone() }
    }

    pub fn drop_features(&self, drop: &[String]) -> Result<Self, DatasetError> {
        for name in drop {
            if self.feature_index(name).is_none() {
                return Err(DatasetError::UnknownFeature(name.clone()));
            }
        }
        let keep: Vec<usize> =
            (0..self.n_features()).filter(|&j| !drop.contains(&self.names[j])).collect();
        Ok(Dataset {
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            columns: keep.iter().map(|&j| self.columns[j].clone()).collect(),
            ..self.clone()
        })
    }

    /// Replaces every column `j` by `column`. Used to permute a single feature.
    pub fn with_column(&self, j: usize, column: Column<F>) -> Self {
        assert_eq!(column.len(), self.n_rows());
        let mut out = self.clone();
        out.columns[j] = column;
        out
    }
}

impl<F: Scalar + num_traits::Float> Dataset<F> {
    /// Natural-log transform of a regression target.
    pub fn log_target(&self) -> Result<Self, DatasetError> {
        if let Some((row, y)) = self.target.iter().enumerate().find(|(_, &y)| y <= F::zero()) {
            return Err(DatasetError::NonPositiveTarget { row: row + 1, value: y.as_f64() });
        }
        Ok(self.with_target(self.target.iter().map(|y| y.ln()).collect()))
    }
}
