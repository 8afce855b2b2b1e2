use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;

/// How a check compares its value against the tolerance.
#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// value < tolerance
    Below,
    /// value ≥ tolerance
    AtLeast,
    /// |value − expected| < tolerance
    Near,
    /// value == expected exactly
    Equal,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    #[serde(flatten)]
    pub value: CheckValue,
    pub comparison: Comparison,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum CheckValue {
    #[serde(rename = "value")]
    One(f64),
    #[serde(rename = "values")]
    Many(Vec<f64>),
}

impl Check {
    pub fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Check::scalar(name, value, Comparison::Below, None, tolerance, value.is_finite() && value < tolerance)
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Check::scalar(name, value, Comparison::AtLeast, None, threshold, value >= threshold)
    }

    pub fn near(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        Check::scalar(name, value, Comparison::Near, Some(expected), tolerance, (value - expected).abs() < tolerance)
    }

    pub fn equal(name: &str, value: f64, expected: f64) -> Self {
        Check::scalar(name, value, Comparison::Equal, Some(expected), 0.0, value == expected)
    }

    /// Every entry of `values` below `tolerance`.
    pub fn all_below(name: &str, values: Vec<f64>, tolerance: f64) -> Self {
        let pass = values.iter().all(|v| v.is_finite() && *v < tolerance);
        Check { name: name.into(), value: CheckValue::Many(values), comparison: Comparison::Below, expected: None, tolerance, pass }
    }

    fn scalar(name: &str, value: f64, comparison: Comparison, expected: Option<f64>, tolerance: f64, pass: bool) -> Self {
        Check { name: name.into(), value: CheckValue::One(value), comparison, expected, tolerance, pass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub id: String,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, checks: Vec<Check>, artifacts: Vec<PathBuf>, error: Option<String>, wall_time_s: f64) -> Self {
        let pass = error.is_none() && checks.iter().all(|c| c.pass);
        ExperimentReport { id: config.experiment.clone(), config, checks, artifacts, error, pass, wall_time_s }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join(format!("{}.report.json", self.id));
        std::fs::write(&path, self.to_json() + "\n")?;
        Ok(path)
    }
}
