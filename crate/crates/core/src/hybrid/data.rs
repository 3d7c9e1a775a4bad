//! Binary-feature datasets with optional labels.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::joint::{draw, joint_statistic};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Rows of 0/1 features with a label in `{0, 1}` or `None` when unlabeled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledBinaryDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<Option<usize>>,
}

impl LabeledBinaryDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<Option<usize>>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let m = features.first().map_or(0, Vec::len);
        for (i, row) in features.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Data(format!("row {i} has {} features, expected {m}", row.len())));
            }
            if row.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::Data(format!("row {i} has a non-binary feature")));
            }
        }
        if let Some(i) = labels.iter().position(|l| matches!(l, Some(y) if *y > 1)) {
            return Err(Error::Data(format!("row {i} has a label outside {{0, 1}}")));
        }
        Ok(Self { features, labels })
    }

    pub fn n(&self) -> usize {
        self.features.len()
    }

    pub fn feature_count(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// Number of labeled rows per class.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0, 0];
        for y in self.labels.iter().flatten() {
            counts[*y] += 1;
        }
        counts
    }

    /// `T(x, y)` for every labeled row.
    pub fn joint_statistics(&self) -> Dataset {
        Dataset::new(
            self.features
                .iter()
                .zip(&self.labels)
                .filter_map(|(x, y)| y.map(|y| joint_statistic(x, y)))
                .collect(),
        )
    }

    /// Same rows with every label dropped where `keep(i)` is false.
    pub fn with_labels_masked(&self, keep: impl Fn(usize) -> bool) -> Self {
        let labels = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| if keep(i) { *l } else { None })
            .collect();
        Self {
            features: self.features.clone(),
            labels,
        }
    }

    /// CSV with binary feature columns and a final label column; an empty
    /// label field marks an unlabeled row. A non-numeric first row is a header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let (label_field, feature_fields) = match record.len() {
                0 | 1 => {
                    return Err(Error::Data(format!(
                        "row {}: need at least one feature and a label column",
                        row + 1
                    )))
                }
                n => (&record[n - 1], record.iter().take(n - 1).collect::<Vec<_>>()),
            };
            let numeric = feature_fields.iter().all(|f| f.parse::<f64>().is_ok());
            if row == 0 && !numeric {
                continue;
            }
            let x = feature_fields
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::Data(format!("row {}: `{f}` is not a number", row + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            let y = if label_field.is_empty() {
                None
            } else {
                Some(label_field.parse::<usize>().map_err(|_| {
                    Error::Data(format!("row {}: label `{label_field}` is not 0 or 1", row + 1))
                })?)
            };
            features.push(x);
            labels.push(y);
        }
        Self::new(features, labels)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (x, y) in self.features.iter().zip(&self.labels) {
            for v in x {
                out.push_str(if *v == 1.0 { "1," } else { "0," });
            }
            if let Some(y) = y {
                out.push_str(&y.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Parameters of the naive Bayes model behind [`synthetic_dataset`].
pub fn synthetic_theta(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta: Vec<f64> = (0..2 * m).map(|_| rng.random_range(-1.5..1.5)).collect();
    // Choose b so both classes are equally likely.
    let sp = |w: &[f64]| w.iter().map(|&v| crate::linalg::softplus(v)).sum::<f64>();
    theta.push(sp(&theta[..m]) - sp(&theta[m..]));
    theta
}

/// `n` fully labeled rows drawn from a naive Bayes model with `m` features,
/// whose parameters also derive from `seed`.
pub fn synthetic_dataset(m: usize, n: usize, seed: u64) -> LabeledBinaryDataset {
    let theta = synthetic_theta(m, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let (features, labels) = (0..n)
        .map(|_| {
            let (x, y) = draw(&theta, &mut rng);
            (x, Some(y))
        })
        .unzip();
    LabeledBinaryDataset { features, labels }
}
