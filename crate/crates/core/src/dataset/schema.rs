use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::DatasetError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Numeric,
    Categorical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "regression")]
    Regression,
    #[serde(rename = "binary")]
    BinaryClassification,
}

/// Column types, target name and task. Feature order follows `columns`.
#[derive(Clone, Debug, PartialEq)]
pub struct Schema {
    pub columns: Vec<(String, ColumnType)>,
    pub target: String,
    pub task: Task,
}

#[derive(Serialize, Deserialize)]
struct SchemaFile {
    target: String,
    task: Task,
    columns: Map<String, Value>,
}

impl Schema {
    /// Feature columns in order, excluding the target.
    pub fn features(&self) -> impl Iterator<Item = &(String, ColumnType)> {
        self.columns.iter().filter(move |(name, _)| *name != self.target)
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        let file: SchemaFile = serde_json::from_str(text)
            .map_err(|e| DatasetError::MalformedSchema(e.to_string()))?;
        let mut columns = Vec::with_capacity(file.columns.len());
        for (name, ty) in file.columns {
            let ty: ColumnType = serde_json::from_value(ty).map_err(|_| {
                DatasetError::MalformedSchema(format!(
                    "column `{name}`: type must be \"numeric\" or \"categorical\""
                ))
            })?;
            columns.push((name, ty));
        }
        Ok(Schema { columns, target: file.target, task: file.task })
    }

    pub fn to_json(&self) -> String {
        let columns = self
            .columns
            .iter()
            .map(|(n, t)| (n.clone(), serde_json::to_value(t).unwrap()))
            .collect();
        let file = SchemaFile { target: self.target.clone(), task: self.task, columns };
        serde_json::to_string_pretty(&file).unwrap()
    }
}
