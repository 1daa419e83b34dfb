use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use crate::num::Scalar;

use super::{Column, ColumnType, Dataset, DatasetError, Schema, Task};

pub fn read_schema(path: impl AsRef<Path>) -> Result<Schema, DatasetError> {
    Schema::from_json(&std::fs::read_to_string(path)?)
}

/// Loads a CSV file with a header row. Every schema column must be present
/// (in any order); extra columns are ignored. Categorical labels are coded
/// in order of first appearance.
pub fn load_csv<F: Scalar>(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset<F>, DatasetError> {
    let reader = csv::ReaderBuilder::new().has_headers(true).from_reader(File::open(path)?);
    from_reader(reader, schema, true)
}

/// Like [`load_csv`] but the target column is optional; when absent the
/// target is filled with zeros. Used for prediction inputs.
pub fn load_csv_features<F: Scalar>(
    path: impl AsRef<Path>,
    schema: &Schema,
) -> Result<Dataset<F>, DatasetError> {
    let reader = csv::ReaderBuilder::new().has_headers(true).from_reader(File::open(path)?);
    from_reader(reader, schema, false)
}

pub(crate) fn from_reader<F: Scalar, R: std::io::Read>(
    mut reader: csv::Reader<R>,
    schema: &Schema,
    require_target: bool,
) -> Result<Dataset<F>, DatasetError> {
    let headers = reader.headers()?.clone();
    let position: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let locate = |name: &str| {
        position.get(name).copied().ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    };

    let features: Vec<(String, ColumnType)> = schema.features().cloned().collect();
    let feature_pos = features.iter().map(|(n, _)| locate(n)).collect::<Result<Vec<_>, _>>()?;
    let target_pos = match locate(&schema.target) {
        Ok(p) => Some(p),
        Err(e) if require_target => return Err(e),
        Err(_) => None,
    };

    let mut numeric: Vec<Vec<F>> = vec![Vec::new(); features.len()];
    let mut codes: Vec<Vec<u32>> = vec![Vec::new(); features.len()];
    let mut dicts: Vec<(Vec<String>, HashMap<String, u32>)> =
        vec![(Vec::new(), HashMap::new()); features.len()];
    let mut target = Vec::new();

    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        for (j, ((name, ty), &pos)) in features.iter().zip(&feature_pos).enumerate() {
            let cell = record.get(pos).unwrap_or("");
            if cell.trim().is_empty() {
                return Err(DatasetError::MissingValue { row, column: name.clone() });
            }
            match ty {
                ColumnType::Numeric => numeric[j].push(parse_cell(cell, row, name)?),
                ColumnType::Categorical => {
                    let (labels, lookup) = &mut dicts[j];
                    let code = *lookup.entry(cell.to_string()).or_insert_with(|| {
                        labels.push(cell.to_string());
                        (labels.len() - 1) as u32
                    });
                    codes[j].push(code);
                }
            }
        }
        target.push(match target_pos {
            Some(pos) => {
                let cell = record.get(pos).unwrap_or("");
                if cell.trim().is_empty() {
                    return Err(DatasetError::MissingValue { row, column: schema.target.clone() });
                }
                parse_cell(cell, row, &schema.target)?
            }
            None => F::zero(),
        });
    }

    let mut names = Vec::with_capacity(features.len());
    let mut columns = Vec::with_capacity(features.len());
    for (j, (name, ty)) in features.into_iter().enumerate() {
        names.push(name);
        columns.push(match ty {
            ColumnType::Numeric => Column::Numeric(std::mem::take(&mut numeric[j])),
            ColumnType::Categorical => Column::Categorical {
                codes: std::mem::take(&mut codes[j]),
                labels: std::mem::take(&mut dicts[j].0),
            },
        });
    }
    let task = if target_pos.is_some() { schema.task } else { Task::Regression };
    let mut data = Dataset::new(names, columns, target, schema.target.clone(), task)?;
    data.task = schema.task;
    Ok(data)
}

fn parse_cell<F: Scalar>(cell: &str, row: usize, column: &str) -> Result<F, DatasetError> {
    match cell.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(F::from_f64(v)),
        _ => Err(DatasetError::UnparseableNumeric {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

/// Writes features (labels for categoricals) followed by the target column.
pub fn write_csv<F: Scalar>(data: &Dataset<F>, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let mut writer = csv::Writer::from_path(path)?;
    write_records(data, &mut writer)?;
    writer.flush()?;
    Ok(())
}

pub(crate) fn write_records<F: Scalar, W: std::io::Write>(
    data: &Dataset<F>,
    writer: &mut csv::Writer<W>,
) -> Result<(), DatasetError> {
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    header.push(data.target_name());
    writer.write_record(&header)?;
    for i in 0..data.n_rows() {
        let mut record: Vec<String> = data
            .columns()
            .iter()
            .map(|c| match c {
                Column::Numeric(v) => format!("{}", v[i].as_f64()),
                Column::Categorical { codes, labels } => labels
                    .get(codes[i] as usize)
                    .cloned()
                    .unwrap_or_else(|| "__unseen__".to_string()),
            })
            .collect();
        record.push(format!("{}", data.target()[i].as_f64()));
        writer.write_record(&record)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(task: Task, cols: &[(&str, ColumnType)]) -> Schema {
        Schema {
            columns: cols.iter().map(|(n, t)| (n.to_string(), *t)).collect(),
            target: "y".into(),
            task,
        }
    }

    fn load(text: &str, s: &Schema) -> Result<Dataset<f64>, DatasetError> {
        from_reader(csv::Reader::from_reader(text.as_bytes()), s, true)
    }

    #[test]
    fn numeric_only_file() {
        let s = schema(Task::Regression, &[("x", ColumnType::Numeric)]);
        let d = load("x,y\n1,2\n3,4\n5.5,6\n", &s).unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.column(0), &Column::Numeric(vec![1.0, 3.0, 5.5]));
        assert!(d.cardinalities().iter().all(Option::is_none));
    }

    #[test]
    fn labels_coded_by_first_appearance() {
        let s = schema(Task::Regression, &[("c", ColumnType::Categorical)]);
        let d = load("y,c\n0,a\n0,b\n0,a\n0,c\n", &s).unwrap();
        match d.column(0) {
            Column::Categorical { codes, labels } => {
                assert_eq!(codes, &vec![0, 1, 0, 2]);
                assert_eq!(labels.len(), 3);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn quoted_fields_follow_rfc4180() {
        let s = schema(Task::Regression, &[("c", ColumnType::Categorical)]);
        let d = load("c,y\n\"a,b\",1\n\"say \"\"hi\"\"\",2\n", &s).unwrap();
        assert_eq!(d.dictionaries()[0].as_ref().unwrap()[1], "say \"hi\"");
    }

    #[test]
    fn classification_target_must_be_binary() {
        let s = schema(Task::BinaryClassification, &[("x", ColumnType::Numeric)]);
        assert!(matches!(load("x,y\n1,0\n2,2\n", &s), Err(DatasetError::NonBinaryTarget { .. })));
    }

    #[test]
    fn ingestion_errors() {
        let s = schema(Task::Regression, &[("x", ColumnType::Numeric)]);
        assert!(matches!(load("z,y\n1,2\n", &s), Err(DatasetError::MissingColumn(c)) if c == "x"));
        assert!(matches!(
            load("x,y\n1,2\nfoo,3\n", &s),
            Err(DatasetError::UnparseableNumeric { row: 2, .. })
        ));
        assert!(matches!(load("x,y\n,2\n", &s), Err(DatasetError::MissingValue { row: 1, .. })));
        assert!(matches!(load("x,y\nNaN,2\n", &s), Err(DatasetError::UnparseableNumeric { .. })));
    }

    #[test]
    fn write_then_reload_is_identical() {
        let s = schema(
            Task::Regression,
            &[("x", ColumnType::Numeric), ("c", ColumnType::Categorical)],
        );
        let d = load("x,c,y\n0.1,a,1e-3\n-2.25,\"b,c\",7\n3.3333333333333335,a,0.30000000000000004\n", &s)
            .unwrap();
        let mut w = csv::Writer::from_writer(Vec::new());
        write_records(&d, &mut w).unwrap();
        let bytes = w.into_inner().unwrap();
        let again = from_reader(csv::Reader::from_reader(bytes.as_slice()), &s, true).unwrap();
        assert_eq!(again, d);
    }
}
