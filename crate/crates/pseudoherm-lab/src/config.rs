//! Experiment configuration: a flat JSON file merged with command-line
//! overrides, then resolved against per-experiment defaults.

use std::path::{Path, PathBuf};

use pseudoherm::{model_from_id, Model};
use serde::{Deserialize, Serialize};

use crate::experiments::{Experiment, ModelFamily};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown experiment id `{0}` (see `pseudoherm-lab list`)")]
    UnknownExperiment(String),
    #[error("no experiment given")]
    MissingExperiment,
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid model id `{0}`")]
    Model(String),
    #[error("experiment `{experiment}` does not accept model `{model}`; expected {expected}")]
    Incompatible { experiment: String, model: String, expected: String },
    #[error("--kappa only applies to scaled-heisenberg models, not `{0}`")]
    KappaWithoutScaling(String),
    #[error("{0} must be positive and finite, got {1}")]
    NotPositive(&'static str, f64),
}

/// Raw settings as read from a config file or the command line.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub model: Option<String>,
    pub out: Option<PathBuf>,
    pub h: Option<f64>,
    pub tmax: Option<f64>,
    pub seed: Option<u64>,
    pub kappa: Option<f64>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.to_owned(), source })
    }

    /// Values in `top` win.
    pub fn merged(self, top: Overrides) -> Overrides {
        Overrides {
            experiment: top.experiment.or(self.experiment),
            model: top.model.or(self.model),
            out: top.out.or(self.out),
            h: top.h.or(self.h),
            tmax: top.tmax.or(self.tmax),
            seed: top.seed.or(self.seed),
            kappa: top.kappa.or(self.kappa),
            samples: top.samples.or(self.samples),
            tolerance: top.tolerance.or(self.tolerance),
        }
    }
}

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub model: String,
    pub out: PathBuf,
    pub h: f64,
    pub tmax: f64,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
}

impl ExperimentConfig {
    pub fn resolve(raw: Overrides) -> Result<(Self, Experiment, Model), ConfigError> {
        let id = raw.experiment.ok_or(ConfigError::MissingExperiment)?;
        let exp = Experiment::from_id(&id).ok_or_else(|| ConfigError::UnknownExperiment(id.clone()))?;
        let d = exp.defaults();
        let mut model_id = raw.model.unwrap_or_else(|| d.model.to_string());
        if let Some(k) = raw.kappa {
            let parts: Vec<&str> = model_id.split(':').collect();
            if parts.first() != Some(&"scaled-heisenberg") || parts.len() < 2 {
                return Err(ConfigError::KappaWithoutScaling(model_id));
            }
            model_id = format!("scaled-heisenberg:{}:{k}", parts[1]);
        }
        let model = model_from_id(&model_id).map_err(|_| ConfigError::Model(model_id.clone()))?;
        let family = ModelFamily::of(&model_id);
        if !exp.accepts(family, model.n()) {
            return Err(ConfigError::Incompatible { experiment: id, model: model_id, expected: exp.model_requirement().into() });
        }
        let cfg = ExperimentConfig {
            experiment: id,
            model: model.id(),
            out: raw.out.unwrap_or_else(|| PathBuf::from("pseudoherm-out")),
            h: raw.h.unwrap_or(d.h),
            tmax: raw.tmax.unwrap_or(d.tmax),
            seed: raw.seed.unwrap_or(0),
            samples: raw.samples.unwrap_or(d.samples),
            tolerance: raw.tolerance.unwrap_or(d.tolerance),
        };
        for (name, v) in [("h", cfg.h), ("tmax", cfg.tmax), ("tolerance", cfg.tolerance)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::NotPositive(name, v));
            }
        }
        Ok((cfg, exp, model))
    }
}
