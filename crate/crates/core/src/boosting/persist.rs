//! JSON model format.
//!
//! ```text
//! {format_version: 1, task, loss, target, f0, learning_rate, n_trees_budget,
//!  features: [{name, type, dictionary?}], trees: [node, ...]}
//! node = {leaf, count}
//!      | {feature, threshold | left_codes, gain, cover, unseen_goes_left, left, right}
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use crate::dataset::{ColumnType, Task};
use crate::num::Real;
use crate::tree::{child_ids, Node, SplitKind, SplitRule, Tree};

use super::loss::Loss;
use super::model::{Ensemble, FeatureMeta};
use super::BoostError;

pub const FORMAT_VERSION: u64 = 1;

fn malformed(msg: impl Into<String>) -> BoostError {
    BoostError::MalformedModel(msg.into())
}

fn node_to_json<F: Real>(node: &Node<F>) -> Value {
    match node {
        Node::Leaf { value, count, .. } => json!({ "leaf": value, "count": count }),
        Node::Internal { rule, gain, cover, unseen_goes_left, left, right, .. } => {
            let mut obj = Map::new();
            obj.insert("feature".into(), json!(rule.feature));
            match &rule.kind {
                SplitKind::NumericThreshold(t) => obj.insert("threshold".into(), json!(t)),
                SplitKind::CategorySubset(codes) => obj.insert("left_codes".into(), json!(codes)),
            };
            obj.insert("gain".into(), json!(gain));
            obj.insert("cover".into(), json!(cover));
            obj.insert("unseen_goes_left".into(), json!(unseen_goes_left));
            obj.insert("left".into(), node_to_json(left));
            obj.insert("right".into(), node_to_json(right));
            Value::Object(obj)
        }
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, BoostError> {
    obj.get(key).ok_or_else(|| malformed(format!("missing key `{key}`")))
}

fn typed<T: DeserializeOwned>(obj: &Map<String, Value>, key: &str) -> Result<T, BoostError> {
    serde_json::from_value(field(obj, key)?.clone())
        .map_err(|e| malformed(format!("key `{key}`: {e}")))
}

fn node_from_json<F: Real>(
    value: &Value,
    node_id: usize,
    features: &[FeatureMeta],
) -> Result<Node<F>, BoostError> {
    let obj = value.as_object().ok_or_else(|| malformed("tree node must be an object"))?;
    if obj.contains_key("leaf") {
        return Ok(Node::Leaf { node_id, value: typed(obj, "leaf")?, count: typed(obj, "count")? });
    }
    let feature: usize = typed(obj, "feature")?;
    let meta = features.get(feature).ok_or_else(|| malformed(format!("feature {feature} out of range")))?;
    let kind = match (meta.column_type, obj.contains_key("threshold"), obj.contains_key("left_codes")) {
        (ColumnType::Numeric, true, false) => SplitKind::NumericThreshold(typed(obj, "threshold")?),
        (ColumnType::Categorical, false, true) => {
            let mut codes: Vec<u32> = typed(obj, "left_codes")?;
            codes.sort_unstable();
            SplitKind::CategorySubset(codes)
        }
        _ => return Err(malformed(format!("split on feature {feature} does not match its type"))),
    };
    let (left_id, right_id) = child_ids(node_id);
    Ok(Node::Internal {
        node_id,
        rule: SplitRule { feature, kind },
        gain: typed(obj, "gain")?,
        cover: typed(obj, "cover")?,
        unseen_goes_left: typed(obj, "unseen_goes_left")?,
        left: Box::new(node_from_json(field(obj, "left")?, left_id, features)?),
        right: Box::new(node_from_json(field(obj, "right")?, right_id, features)?),
    })
}

impl<F: Real> Ensemble<F> {
    pub fn to_json(&self) -> Value {
        let features: Vec<Value> = self
            .features
            .iter()
            .map(|f| {
                let mut obj = Map::new();
                obj.insert("name".into(), json!(f.name));
                obj.insert("type".into(), json!(f.column_type));
                if let Some(dict) = &f.dictionary {
                    obj.insert("dictionary".into(), json!(dict));
                }
                Value::Object(obj)
            })
            .collect();
        json!({
            "format_version": FORMAT_VERSION,
            "task": self.task,
            "loss": self.loss,
            "target": self.target_name,
            "f0": self.f0,
            "learning_rate": self.learning_rate,
            "n_trees_budget": self.n_trees_budget,
            "features": features,
            "trees": self.trees.iter().map(|t| node_to_json(&t.root)).collect::<Vec<_>>(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("model serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, BoostError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        let obj = doc.as_object().ok_or_else(|| malformed("model must be a JSON object"))?;
        let version = field(obj, "format_version")?
            .as_u64()
            .ok_or_else(|| malformed("format_version must be an integer"))?;
        if version != FORMAT_VERSION {
            return Err(BoostError::IncompatibleVersion(version));
        }
        let task: Task = typed(obj, "task")?;
        let loss: Loss = typed(obj, "loss")?;
        let raw_features = field(obj, "features")?
            .as_array()
            .ok_or_else(|| malformed("features must be an array"))?;
        let mut features = Vec::with_capacity(raw_features.len());
        for f in raw_features {
            let f = f.as_object().ok_or_else(|| malformed("feature entry must be an object"))?;
            let column_type: ColumnType = typed(f, "type")?;
            let dictionary: Option<Vec<String>> = match f.get("dictionary") {
                Some(_) => Some(typed(f, "dictionary")?),
                None => None,
            };
            if (column_type == ColumnType::Categorical) != dictionary.is_some() {
                return Err(malformed("categorical features need a dictionary, numeric ones must not have one"));
            }
            features.push(FeatureMeta { name: typed(f, "name")?, column_type, dictionary });
        }
        let cardinalities: Vec<Option<usize>> =
            features.iter().map(|f| f.dictionary.as_ref().map(Vec::len)).collect();
        let trees = field(obj, "trees")?
            .as_array()
            .ok_or_else(|| malformed("trees must be an array"))?
            .iter()
            .map(|t| {
                Ok(Tree {
                    root: node_from_json(t, 0, &features)?,
                    n_features: features.len(),
                    cardinalities: cardinalities.clone(),
                })
            })
            .collect::<Result<Vec<_>, BoostError>>()?;
        Ok(Ensemble {
            f0: typed(obj, "f0")?,
            trees,
            learning_rate: typed(obj, "learning_rate")?,
            loss,
            task,
            features,
            target_name: typed(obj, "target")?,
            n_trees_budget: match obj.get("n_trees_budget") {
                Some(_) => typed(obj, "n_trees_budget")?,
                None => 0,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BoostError> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BoostError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stub_model() -> Ensemble<f64> {
        Ensemble {
            f0: 0.1 + 0.2,
            trees: vec![],
            learning_rate: 0.1,
            loss: Loss::LogLoss,
            task: Task::BinaryClassification,
            features: vec![
                FeatureMeta { name: "x".into(), column_type: ColumnType::Numeric, dictionary: None },
                FeatureMeta {
                    name: "c".into(),
                    column_type: ColumnType::Categorical,
                    dictionary: Some(vec!["a".into(), "b".into()]),
                },
            ],
            target_name: "y".into(),
            n_trees_budget: 100,
        }
    }

    #[test]
    fn stub_model_round_trips() {
        let m = stub_model();
        let text = m.to_json_string();
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["trees"], json!([]));
        assert_eq!(doc["loss"], json!("log_loss"));
        assert_eq!(doc["task"], json!("binary"));
        assert_eq!(Ensemble::<f64>::from_json_str(&text).unwrap(), m);
    }

    #[test]
    fn unknown_version_rejected() {
        let mut doc = stub_model().to_json();
        doc["format_version"] = json!(2);
        assert!(matches!(
            Ensemble::<f64>::from_json_str(&doc.to_string()),
            Err(BoostError::IncompatibleVersion(2))
        ));
    }

    #[test]
    fn malformed_documents_rejected() {
        assert!(matches!(Ensemble::<f64>::from_json_str("[1,2]"), Err(BoostError::MalformedModel(_))));
        let mut doc = stub_model().to_json();
        doc["trees"] = json!([{"feature": 0, "left_codes": [0], "gain": 1.0, "cover": 2,
            "unseen_goes_left": true, "left": {"leaf": 1.0, "count": 1}, "right": {"leaf": 0.0, "count": 1}}]);
        assert!(matches!(
            Ensemble::<f64>::from_json_str(&doc.to_string()),
            Err(BoostError::MalformedModel(_))
        ));
    }
}
