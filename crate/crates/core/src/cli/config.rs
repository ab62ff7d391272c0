// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: one JSON document with a versioned schema.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "units": "eV",
//!   "scenario": { "kind": "rabi_drive", ... },
//!   "sweep": { "parameter": "rabi.omega", "values": [0.1, 0.2, 0.4] },
//!   "routes": "both",
//!   "dynamic": { "n_y": 500 },
//!   "output": { "format": "csv" }
//! }
//! ```
//!
//! `ħ = 1`; energies are in the unit named by `units` (a label only) and
//! times in its inverse.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::FitWindow;
use crate::scenarios::{DynamicControls, ScenarioError, ScenarioSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Field {
            path: path.into(),
            message: message.into(),
        }
    }

    fn scenario(prefix: &str, e: ScenarioError) -> Self {
        match e {
            ScenarioError::Invalid { field, message } => Self::field(format!("{prefix}.{field}"), message),
            other => Self::field(prefix, other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routes {
    #[default]
    Analytic,
    Dynamic,
    Both,
}

impl Routes {
    pub fn analytic(self) -> bool {
        matches!(self, Self::Analytic | Self::Both)
    }

    pub fn dynamic(self) -> bool {
        matches!(self, Self::Dynamic | Self::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                if k == n - 1 {
                    return self.stop;
                }
                match self.spacing {
                    Spacing::Linear => self.start + f * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<Range>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    pub scenario: ScenarioSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub routes: Routes,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic: Option<DynamicControls>,
    #[serde(default)]
    pub output: Output,
}

/// One evaluation point: the sweep value (if any) and its scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub value: Option<f64>,
    pub scenario: ScenarioSpec,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "scenario" {
                if let Some(inner) = scenario_error(text) {
                    return inner;
                }
            }
            ConfigError::field(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn dynamic_controls(&self) -> DynamicControls {
        self.dynamic.clone().unwrap_or_default()
    }

    pub fn sweep_values(&self) -> Option<Vec<f64>> {
        let s = self.sweep.as_ref()?;
        Some(match (&s.values, &s.range) {
            (Some(v), _) => v.clone(),
            (None, Some(r)) => r.values(),
            (None, None) => Vec::new(),
        })
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::field(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        self.scenario
            .validate()
            .map_err(|e| ConfigError::scenario("scenario", e))?;
        if let Some(s) = &self.sweep {
            match (&s.values, &s.range) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError::field("sweep", "give either values or range, not both"))
                }
                (None, None) => return Err(ConfigError::field("sweep", "needs values or range")),
                (None, Some(r)) => {
                    if r.count == 0 {
                        return Err(ConfigError::field("sweep.range.count", "must be >= 1"));
                    }
                    if !(r.start.is_finite() && r.stop.is_finite()) {
                        return Err(ConfigError::field("sweep.range", "start and stop must be finite"));
                    }
                    if r.stop < r.start {
                        return Err(ConfigError::field("sweep.range", "stop must not be below start"));
                    }
                    if r.spacing == Spacing::Log && !(r.start > 0.0) {
                        return Err(ConfigError::field("sweep.range.start", "log spacing needs start > 0"));
                    }
                }
                (Some(_), None) => {}
            }
            let values = self.sweep_values().unwrap_or_default();
            if values.is_empty() {
                return Err(ConfigError::field("sweep.values", "must not be empty"));
            }
            if let Some(k) = values.iter().position(|v| !v.is_finite()) {
                return Err(ConfigError::field(format!("sweep.values[{k}]"), "must be finite"));
            }
            if let Some(k) = values.windows(2).position(|w| w[1] < w[0]) {
                return Err(ConfigError::field(format!("sweep.values[{}]", k + 1), "values must be sorted"));
            }
            for v in &values {
                self.scenario
                    .with_parameter(&s.parameter, *v)
                    .map_err(|e| match e {
                        ScenarioError::Invalid { field, message } if field == s.parameter => {
                            ConfigError::field("sweep.parameter", format!("{field}: {message}"))
                        }
                        other => ConfigError::scenario(&format!("sweep.values({v})"), other),
                    })?;
            }
        }
        if let Some(d) = &self.dynamic {
            if d.samples < 2 {
                return Err(ConfigError::field("dynamic.samples", "must be >= 2"));
            }
            if let Some(h) = d.horizon {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(ConfigError::field("dynamic.horizon", "must be > 0"));
                }
            }
            if let Some(dt) = d.dt {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(ConfigError::field("dynamic.dt", "must be > 0"));
                }
            }
            if let Some(w) = d.fit_window {
                FitWindow::new(w.start, w.end)
                    .map_err(|_| ConfigError::field("dynamic.fit_window", "need 0 <= start < end"))?;
            }
        }
        Ok(())
    }

    /// Evaluation points in sweep order.
    pub fn points(&self) -> Vec<Point> {
        match (&self.sweep, self.sweep_values()) {
            (Some(s), Some(values)) => values
                .into_iter()
                .map(|v| Point {
                    value: Some(v),
                    // validated in `validate`
                    scenario: self.scenario.with_parameter(&s.parameter, v).unwrap_or_else(|_| self.scenario.clone()),
                })
                .collect(),
            _ => vec![Point {
                value: None,
                scenario: self.scenario.clone(),
            }],
        }
    }
}

/// The tagged scenario enum is buffered before dispatch, which hides the
/// failing field; re-run the variant directly to recover its path.
fn scenario_error(text: &str) -> Option<ConfigError> {
    use crate::scenarios::{RabiDrive, Scattering, UnstableLevel};

    fn inner<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Option<ConfigError> {
        serde_path_to_error::deserialize::<_, T>(v).err().map(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "scenario".into() } else { format!("scenario.{path}") };
            ConfigError::field(path, e.into_inner().to_string())
        })
    }

    let root: serde_json::Value = serde_json::from_str(text).ok()?;
    let mut scenario = root.get("scenario")?.as_object()?.clone();
    let kind = scenario.remove("kind")?;
    let body = serde_json::Value::Object(scenario);
    match kind.as_str()? {
        "rabi_drive" => inner::<RabiDrive>(body),
        "unstable_level" => inner::<UnstableLevel>(body),
        "scattering" => inner::<Scattering>(body),
        _ => None,
    }
}
