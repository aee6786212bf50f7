//! Reading random vectors from CSV or JSON and writing them back as JSON.
//!
//! CSV: a header row; a column named `w` or `weight` holds atom weights,
//! every other column is one coordinate. JSON: `{"weights": [...],
//! "values": [[...], ...]}` with `weights` optional. Missing weights mean
//! equal weights.

use std::fs;
use std::path::Path;

use lsigma::{FiniteSpace, RandomVector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize, Deserialize)]
pub struct DataFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl DataFile {
    pub fn from_vector(v: &RandomVector) -> Self {
        DataFile { weights: Some(v.space().weights().to_vec()), values: v.to_rows() }
    }

    pub fn into_vector(self) -> CliResult<RandomVector> {
        build(self.weights, self.values)
    }
}

fn build(weights: Option<Vec<f64>>, values: Vec<Vec<f64>>) -> CliResult<RandomVector> {
    if values.is_empty() {
        return Err(CliError::invalid("no rows"));
    }
    let d = values[0].len();
    if d == 0 {
        return Err(CliError::invalid("rows have no value columns"));
    }
    for (i, row) in values.iter().enumerate() {
        if row.len() != d {
            return Err(CliError::invalid(format!("row {i} has {} values, expected {d}", row.len())));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(CliError::invalid(format!("row {i}, column {j}: non-finite value")));
        }
    }
    let space = match weights {
        None => FiniteSpace::uniform(values.len()),
        Some(w) => {
            if w.len() != values.len() {
                return Err(CliError::invalid(format!("{} weights for {} rows", w.len(), values.len())));
            }
            if let Some(i) = w.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(CliError::invalid(format!("row {i}: weight {} is not positive", w[i])));
            }
            FiniteSpace::new(w)?
        }
    };
    Ok(RandomVector::new(space, values)?)
}

pub fn parse_json(text: &str) -> CliResult<RandomVector> {
    let data: DataFile = serde_json::from_str(text).map_err(|e| CliError::invalid(format!("bad data JSON: {e}")))?;
    data.into_vector()
}

pub fn parse_csv(text: &str) -> CliResult<RandomVector> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::invalid(format!("bad CSV header: {e}")))?.clone();
    let weight_col = headers.iter().position(|h| h.eq_ignore_ascii_case("w") || h.eq_ignore_ascii_case("weight"));
    let mut weights = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::invalid(format!("row {i}: {e}")))?;
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| CliError::invalid(format!("row {i}, column {}: cannot parse {field:?}", &headers[j])))?;
            if Some(j) == weight_col {
                weights.push(v);
            } else {
                row.push(v);
            }
        }
        values.push(row);
    }
    build(weight_col.map(|_| weights), values)
}

/// Loads a data file, choosing the format by extension (`.json`, else CSV).
pub fn load(path: &Path) -> CliResult<RandomVector> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed = if is_json { parse_json(&text) } else { parse_csv(&text) };
    parsed.map_err(|e| match e {
        CliError::Invalid(msg) => CliError::Invalid(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_json(v: &RandomVector) -> String {
    serde_json::to_string(&DataFile::from_vector(v)).expect("finite floats serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_without_weights_is_uniform() {
        let v = parse_csv("y1\n1\n2\n3\n").unwrap();
        assert_eq!(v.len(), 3);
        assert!(v.space().is_uniform());
        assert_eq!(v.flat(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn csv_with_weight_column_anywhere() {
        let v = parse_csv("y1,w,y2\n1,0.25,5\n2,0.75,6\n").unwrap();
        assert_eq!(v.space().weights(), &[0.25, 0.75]);
        assert_eq!(v.to_rows(), vec![vec![1.0, 5.0], vec![2.0, 6.0]]);
    }

    #[test]
    fn json_with_weights() {
        let v = parse_json(r#"{"weights":[0.25,0.75],"values":[[1],[3]]}"#).unwrap();
        assert_eq!(v.space().weights(), &[0.25, 0.75]);
    }

    #[test]
    fn rejects_bad_rows() {
        let e = parse_csv("y1,y2\n1,2\nNaN,3\n").unwrap_err().to_string();
        assert!(e.contains("row 1"), "{e}");
        let e = parse_json(r#"{"values":[[1,2],[3]]}"#).unwrap_err().to_string();
        assert!(e.contains("row 1"), "{e}");
        assert!(parse_csv("y1\n1\n2,3\n").is_err());
        let e = parse_csv("y,w\n1,0\n2,1\n").unwrap_err().to_string();
        assert!(e.contains("not positive"), "{e}");
        assert!(parse_json(r#"{"weights":[0.5,0.6],"values":[[1],[3]]}"#).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let v = parse_json(r#"{"weights":[0.1,0.2,0.7],"values":[[0.1],[1e-300],[3.141592653589793]]}"#).unwrap();
        let back = parse_json(&to_json(&v)).unwrap();
        assert_eq!(back.flat(), v.flat());
        assert_eq!(back.space().weights(), v.space().weights());
    }
}
