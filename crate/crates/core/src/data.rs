// Copyright 2026 The pqmselect developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Dataset ingestion: PROBEN1-style `.dt` files, generic CSV, z-score
//! normalization and a seeded synthetic set for smoke runs.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// In-memory tabular classification dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    /// Row-major N×F feature matrix.
    pub features: Vec<Vec<f64>>,
    /// Dense class indices, one per row.
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Checks the structural invariants (consistent arity, labels in range,
    /// finite features, at least one example per class index space).
    pub fn validate(&self) -> Result<()> {
        let arity = self.feature_count();
        if self.features.len() != self.labels.len() {
            return Err(Error::Argument(format!(
                "{} feature rows but {} labels",
                self.features.len(),
                self.labels.len()
            )));
        }
        if self.len() < self.class_count {
            return Err(Error::Argument(format!(
                "{} examples cannot cover {} classes",
                self.len(),
                self.class_count
            )));
        }
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != arity {
                return Err(Error::Argument(format!(
                    "row {i} has {} features, expected {arity}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Argument(format!("row {i} has a non-finite feature")));
            }
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= self.class_count) {
            return Err(Error::Argument(format!(
                "label {bad} outside class count {}",
                self.class_count
            )));
        }
        Ok(())
    }

    /// Borrowed view onto a subset of rows.
    pub fn view<'a>(&'a self, indices: &'a [usize]) -> DatasetView<'a> {
        DatasetView {
            dataset: self,
            indices,
        }
    }
}

/// A subset of dataset rows, addressed through an index list.
#[derive(Clone, Copy, Debug)]
pub struct DatasetView<'a> {
    dataset: &'a Dataset,
    indices: &'a [usize],
}

impl<'a> DatasetView<'a> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.dataset.feature_count()
    }

    pub fn class_count(&self) -> usize {
        self.dataset.class_count
    }

    pub fn features(&self, i: usize) -> &'a [f64] {
        &self.dataset.features[self.indices[i]]
    }

    pub fn label(&self, i: usize) -> usize {
        self.dataset.labels[self.indices[i]]
    }

    /// Number of distinct labels present in the view.
    pub fn distinct_labels(&self) -> usize {
        let mut seen = vec![false; self.dataset.class_count];
        let mut count = 0;
        for &i in self.indices {
            let l = self.dataset.labels[i];
            if !seen[l] {
                seen[l] = true;
                count += 1;
            }
        }
        count
    }
}

const PROBEN1_HEADER_KEYS: [&str; 7] = [
    "bool_in",
    "real_in",
    "bool_out",
    "real_out",
    "training_examples",
    "validation_examples",
    "test_examples",
];

/// Loads a PROBEN1-style `.dt` file.
///
/// The header consists of `key=value` lines for `bool_in`, `real_in`,
/// `bool_out`, `real_out`, `training_examples`, `validation_examples` and
/// `test_examples`, followed by whitespace-separated numeric rows. The
/// first `bool_in + real_in` columns are features; the remaining columns
/// are a one-hot class encoding decoded by argmax (ties to the lowest
/// index). The train/validation/test partitions are concatenated — fold
/// construction happens downstream.
pub fn load_proben1<P: AsRef<Path>>(path: P) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "proben1".to_string());

    let mut header: HashMap<String, usize> = HashMap::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut in_cols = 0usize;
    let mut out_cols = 0usize;
    let mut expected_rows = 0usize;
    let mut header_done = false;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !header_done {
            if let Some((key, value)) = line.split_once('=') {
                let key = key.trim();
                let value = value.trim();
                if PROBEN1_HEADER_KEYS.contains(&key) {
                    let parsed: usize = value.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("header value for {key} is not a number: {value:?}"),
                    })?;
                    header.insert(key.to_string(), parsed);
                    continue;
                }
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("unknown header key {key:?}"),
                });
            }
            // First data row: the header must be complete.
            for key in PROBEN1_HEADER_KEYS {
                if !header.contains_key(key) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("header is missing key {key}"),
                    });
                }
            }
            in_cols = header["bool_in"] + header["real_in"];
            out_cols = header["bool_out"] + header["real_out"];
            expected_rows =
                header["training_examples"] + header["validation_examples"] + header["test_examples"];
            if in_cols == 0 || out_cols == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    message: "header declares zero input or output columns".into(),
                });
            }
            header_done = true;
        }
        let mut row = Vec::with_capacity(in_cols + out_cols);
        for token in line.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("non-numeric token {token:?}"),
            })?;
            row.push(v);
        }
        if row.len() != in_cols + out_cols {
            return Err(Error::Parse {
                line: lineno,
                message: format!(
                    "row has {} columns, expected {} inputs + {} outputs",
                    row.len(),
                    in_cols,
                    out_cols
                ),
            });
        }
        let outputs = &row[in_cols..];
        let mut best = 0usize;
        for (i, &v) in outputs.iter().enumerate() {
            if v > outputs[best] {
                best = i;
            }
        }
        labels.push(best);
        row.truncate(in_cols);
        features.push(row);
    }

    if !header_done {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "file contains no data rows".into(),
        });
    }
    if features.len() != expected_rows {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: format!(
                "found {} data rows but header announces {expected_rows}",
                features.len()
            ),
        });
    }

    let ds = Dataset {
        name,
        features,
        labels,
        class_count: out_cols,
    };
    ds.validate()?;
    Ok(ds)
}

/// How to locate the label column of a CSV file.
#[derive(Clone, Debug)]
pub enum LabelColumn {
    /// Header name.
    Name(String),
    /// Zero-based column index.
    Index(usize),
}

/// Loads a headered CSV file; every non-label column must be numeric.
/// Labels are mapped to dense indices in order of first appearance.
pub fn load_csv<P: AsRef<Path>>(path: P, label: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let label_idx = match label {
        LabelColumn::Index(i) => {
            if *i >= headers.len() {
                return Err(Error::Argument(format!(
                    "label column index {i} outside {} columns",
                    headers.len()
                )));
            }
            *i
        }
        LabelColumn::Name(n) => headers
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| Error::Argument(format!("label column {n:?} not found in header")))?,
    };

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut label_map: HashMap<String, usize> = HashMap::new();
    let mut label_order = Vec::new();

    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(0),
            message: e.to_string(),
        })?;
        let lineno = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(0);
        let mut row = Vec::with_capacity(headers.len().saturating_sub(1));
        for (i, field) in record.iter().enumerate() {
            if i == label_idx {
                let field = field.trim();
                if field.is_empty() {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "empty label field".into(),
                    });
                }
                let next = label_map.len();
                let id = *label_map.entry(field.to_string()).or_insert(next);
                if id == next {
                    label_order.push(field.to_string());
                }
                labels.push(id);
            } else {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("non-numeric feature {field:?} in column {}", &headers[i]),
                })?;
                row.push(v);
            }
        }
        features.push(row);
    }

    if features.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "CSV file contains no data rows".into(),
        });
    }

    let ds = Dataset {
        name,
        features,
        labels,
        class_count: label_map.len(),
    };
    ds.validate()?;
    Ok(ds)
}

/// Per-feature z-score over the whole dataset; zero-variance features map
/// to all zeros. The standard deviation is the population form (divisor
/// `N`), which makes the transform idempotent up to round-off.
pub fn normalize(mut dataset: Dataset) -> Dataset {
    let n = dataset.len();
    if n == 0 {
        return dataset;
    }
    let arity = dataset.feature_count();
    for col in 0..arity {
        let mean = dataset.features.iter().map(|r| r[col]).sum::<f64>() / n as f64;
        let var = dataset
            .features
            .iter()
            .map(|r| (r[col] - mean).powi(2))
            .sum::<f64>()
            / n as f64;
        if var == 0.0 {
            for row in &mut dataset.features {
                row[col] = 0.0;
            }
        } else {
            let inv = 1.0 / var.sqrt();
            for row in &mut dataset.features {
                row[col] = (row[col] - mean) * inv;
            }
        }
    }
    dataset
}

/// Seeded two-feature XOR-style set: features uniform in `[-1, 1]²`, label
/// 1 iff the coordinates have the same sign. Default smoke-test data for
/// the superposition runner.
pub fn synthetic_xor(points: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(points);
    let mut labels = Vec::with_capacity(points);
    for _ in 0..points {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        labels.push(usize::from((x > 0.0) == (y > 0.0)));
        features.push(vec![x, y]);
    }
    Dataset {
        name: "synthetic-xor".into(),
        features,
        labels,
        class_count: 2,
    }
}
