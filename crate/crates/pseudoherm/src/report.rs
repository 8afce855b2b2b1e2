//! Serializable residual and comparison reports.

use serde::Serialize;

use crate::linalg::Vector;

/// One named residual at one point.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResidualEntry {
    pub identity_name: String,
    pub point: Vec<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualEntry {
    pub fn new(name: &str, point: &Vector, residual: f64, tolerance: f64) -> Self {
        ResidualEntry {
            identity_name: name.to_string(),
            point: point.iter().copied().collect(),
            residual,
            tolerance,
            pass: residual.is_finite() && residual < tolerance,
        }
    }
}

/// A list of residual entries; serializes as a JSON array.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
#[serde(transparent)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn push(&mut self, entry: ResidualEntry) {
        self.entries.push(entry);
    }

    pub fn extend(&mut self, other: ResidualReport) {
        self.entries.extend(other.entries);
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    /// Largest residual for a given identity name (0 when absent).
    pub fn max_residual(&self, name: &str) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.identity_name == name)
            .fold(0.0, |m, e| m.max(e.residual))
    }

    pub fn names(&self) -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        for e in &self.entries {
            if !v.contains(&e.identity_name) {
                v.push(e.identity_name.clone());
            }
        }
        v
    }

    pub fn failures(&self) -> Vec<&ResidualEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Analytic value against a finite-difference estimate.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct VariationReport {
    pub case: String,
    pub analytic: f64,
    pub finite_difference: f64,
    pub rel_error: f64,
    pub pass: bool,
}

impl VariationReport {
    /// Relative error with an absolute floor `floor` in the denominator.
    pub fn new(case: &str, analytic: f64, fd: f64, tolerance: f64, floor: f64) -> Self {
        let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(floor);
        VariationReport {
            case: case.to_string(),
            analytic,
            finite_difference: fd,
            rel_error: rel,
            pass: rel.is_finite() && rel < tolerance,
        }
    }
}
