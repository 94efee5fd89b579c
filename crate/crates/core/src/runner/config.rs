use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Result, RunnerError};
use crate::agents::{AgentError, Algorithm, Hyperparams};
use crate::indicators::{default_specs, IndicatorSpec};
use crate::normalize::{FamilyOverrides, NormalizationKind};
use crate::trading_env::{EnvConfig, EnvError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// OHLCV CSV; relative paths resolve against the working directory.
    pub path: PathBuf,
    /// First date included.
    pub start: NaiveDate,
    /// First date excluded.
    pub end: NaiveDate,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            path: PathBuf::from("data/sample_daily.csv"),
            start: NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2022, 1, 1).expect("valid date"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    pub specs: Vec<IndicatorSpec>,
    /// When set, columns are pruned with the greedy correlation filter at this threshold.
    pub select_threshold: Option<f64>,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        Self { specs: default_specs(), select_threshold: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizationConfig {
    pub kind: NormalizationKind,
    pub overrides: FamilyOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub algorithm: Algorithm,
    pub hyperparams: Hyperparams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestConfig {
    pub risk_free: f64,
    pub periods_per_year: f64,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self { risk_free: 0.0, periods_per_year: 252.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    pub features: FeaturesConfig,
    pub normalization: NormalizationConfig,
    pub env: EnvConfig,
    pub agent: AgentConfig,
    pub backtest: BacktestConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataConfig::default(),
            features: FeaturesConfig::default(),
            normalization: NormalizationConfig::default(),
            env: EnvConfig::default(),
            agent: AgentConfig::default(),
            backtest: BacktestConfig::default(),
            seed: 0,
            output_dir: PathBuf::from("runs/default"),
        }
    }
}

fn schema(key: impl Into<String>, message: impl Into<String>) -> RunnerError {
    RunnerError::Schema { key: key.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            schema(if key == "." { String::new() } else { key }, e.inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.start >= self.data.end {
            return Err(schema("data.end", "must be after data.start"));
        }
        if self.features.specs.is_empty() {
            return Err(schema("features.specs", "at least one indicator is required"));
        }
        let mut names = std::collections::BTreeSet::new();
        for (i, spec) in self.features.specs.iter().enumerate() {
            spec.validate()
                .map_err(|e| schema(format!("features.specs[{i}]"), e.to_string()))?;
            if !names.insert(spec.name()) {
                return Err(schema(format!("features.specs[{i}]"), format!("duplicate column {}", spec.name())));
            }
        }
        if let Some(t) = self.features.select_threshold {
            if !(t > 0.0 && t <= 1.0) {
                return Err(schema("features.select_threshold", "must lie in (0, 1]"));
            }
        }
        self.env.validate().map_err(|e| match e {
            EnvError::InvalidConfig(msg) => {
                let field = msg.split_whitespace().next().unwrap_or("").to_string();
                schema(format!("env.{field}"), msg)
            }
            other => schema("env", other.to_string()),
        })?;
        self.agent.hyperparams.validate().map_err(|e| match e {
            AgentError::InvalidHyperparams { key, reason } => {
                schema(format!("agent.hyperparams.{key}"), reason)
            }
            other => schema("agent.hyperparams", other.to_string()),
        })?;
        if !(self.backtest.periods_per_year > 0.0) {
            return Err(schema("backtest.periods_per_year", "must be positive"));
        }
        if !self.backtest.risk_free.is_finite() {
            return Err(schema("backtest.risk_free", "must be finite"));
        }
        Ok(())
    }

    /// Canonical JSON: every field present, object keys sorted.
    pub fn canonical_json(&self) -> String {
        // serde_json's Value map is ordered by key, so this sorts all objects
        let v = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    /// SHA-256 of [`ExperimentConfig::canonical_json`], lowercase hex.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.canonical_json().as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|source| RunnerError::ConfigIo {
        path: path.display().to_string(),
        source,
    })?;
    ExperimentConfig::from_json(&text)
}
