//! Observations stored as sufficient-statistic vectors, with CSV ingestion.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// i.i.d. observations already mapped through the sufficient statistic.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    pub labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        Self {
            points,
            labels: None,
        }
    }

    /// One-dimensional observations.
    pub fn from_scalars(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::Data(format!(
                "{} labels for {} points",
                labels.len(),
                self.points.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Coordinatewise sum of the points, or `None` for an empty dataset.
    pub fn sum(&self) -> Option<Vec<f64>> {
        let first = self.points.first()?;
        let mut acc = vec![0.0; first.len()];
        for p in &self.points {
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
        }
        Some(acc)
    }

    pub fn mean(&self) -> Option<Vec<f64>> {
        let n = self.n() as f64;
        self.sum().map(|s| s.into_iter().map(|v| v / n).collect())
    }

    /// Reads `dimension` sufficient-statistic columns per row plus an optional
    /// trailing integer label column. `header = None` detects a header by
    /// whether the first row parses as numbers.
    pub fn from_csv_reader<R: Read>(
        reader: R,
        dimension: usize,
        header: Option<bool>,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut points = Vec::new();
        let mut labels: Vec<usize> = Vec::new();
        let mut labelled: Option<bool> = None;
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if row == 0 {
                let looks_numeric = record.iter().all(|f| f.parse::<f64>().is_ok());
                if header.unwrap_or(!looks_numeric) {
                    continue;
                }
            }
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let has_label = match record.len() {
                n if n == dimension => false,
                n if n == dimension + 1 => true,
                n => {
                    return Err(Error::Data(format!(
                        "row {}: expected {dimension} or {} columns, found {n}",
                        row + 1,
                        dimension + 1
                    )))
                }
            };
            if *labelled.get_or_insert(has_label) != has_label {
                return Err(Error::Data(format!(
                    "row {}: label column present on some rows only",
                    row + 1
                )));
            }
            let mut point = Vec::with_capacity(dimension);
            for field in record.iter().take(dimension) {
                let v: f64 = field.parse().map_err(|_| {
                    Error::Data(format!("row {}: `{field}` is not a number", row + 1))
                })?;
                if !v.is_finite() {
                    return Err(Error::Data(format!("row {}: non-finite value", row + 1)));
                }
                point.push(v);
            }
            if has_label {
                let field = &record[dimension];
                let label = field.parse::<usize>().map_err(|_| {
                    Error::Data(format!("row {}: label `{field}` is not an integer", row + 1))
                })?;
                labels.push(label);
            }
            points.push(point);
        }
        Ok(Self {
            points,
            labels: labelled.unwrap_or(false).then_some(labels),
        })
    }

    pub fn from_csv_path(path: impl AsRef<Path>, dimension: usize, header: Option<bool>) -> Result<Self> {
        let file = File::open(path.as_ref()).map_err(|e| {
            Error::Io(format!("{}: {e}", path.as_ref().display()))
        })?;
        Self::from_csv_reader(file, dimension, header)
    }
}
