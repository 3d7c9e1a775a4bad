//! The JSON document every command emits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl Diagnostic {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: Some(tolerance),
            passed: value <= tolerance,
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Arguments after the program name.
    pub command: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    pub inputs: Value,
    #[serde(default)]
    pub estimates: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default)]
    pub diagnostics: Vec<Diagnostic>,
    /// Varies between runs; ignore when comparing reports.
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn new(command: Vec<String>, family: Option<String>, inputs: Value) -> Self {
        Self {
            command,
            family,
            inputs,
            estimates: BTreeMap::new(),
            objective: None,
            diagnostics: Vec::new(),
            wall_time_seconds: 0.0,
        }
    }

    pub fn estimate(&mut self, name: &str, value: Vec<f64>) {
        self.estimates.insert(name.to_string(), value);
    }

    pub fn all_passed(&self) -> bool {
        self.diagnostics.iter().all(|d| d.passed)
    }
}
