//! TOML experiment configuration and sweep expansion.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::registry::PROBLEMS;
use crate::error::{LabError, Result};
use crate::optimize::StopRule;
use crate::schedules::StepPolicy;

pub const DEFAULT_SWEEP_CAP: usize = 10_000;

fn default_cap() -> usize {
    DEFAULT_SWEEP_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    #[serde(default)]
    pub params: toml::Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerSpec {
    #[default]
    Gd,
    Sgd { batch_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
    #[serde(default = "default_cap")]
    pub sweep_cap: usize,
    pub problem: ProblemSpec,
    pub policy: StepPolicy,
    pub stop: StopRule,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    /// Dotted key → values; the cross product is run.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sweep: BTreeMap<String, Vec<toml::Value>>,
}

/// A problem description on its own, as read by `constants`, `verify` and
/// `lemmas`. Extra top-level keys are ignored so a full experiment config
/// is accepted too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSpec,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: ProblemFile = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        if !PROBLEMS.contains(&f.problem.name.as_str()) {
            return Err(LabError::Config(format!(
                "unknown problem '{}'; available: {}",
                f.problem.name,
                PROBLEMS.join(", ")
            )));
        }
        Ok(f)
    }
}

impl ExperimentConfig {
    /// Parses and validates; parse errors carry the TOML line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !PROBLEMS.contains(&self.problem.name.as_str()) {
            return Err(LabError::Config(format!(
                "unknown problem '{}'; available: {}",
                self.problem.name,
                PROBLEMS.join(", ")
            )));
        }
        self.policy.validate()?;
        self.stop.validate()?;
        if let OptimizerSpec::Sgd { batch_size: 0 } = self.optimizer {
            return Err(LabError::Config("batch_size must be at least 1".into()));
        }
        let size = self.sweep_size();
        if size > self.sweep_cap {
            return Err(LabError::Config(format!("sweep has {size} runs, above the cap of {}", self.sweep_cap)));
        }
        if self.sweep.values().any(|v| v.is_empty()) {
            return Err(LabError::Config("sweep lists must be non-empty".into()));
        }
        Ok(())
    }

    pub fn sweep_size(&self) -> usize {
        self.sweep.values().fold(1usize, |acc, v| acc.saturating_mul(v.len()))
    }

    /// One config per point of the sweep cross product (sweep cleared).
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        let mut base = self.clone();
        base.sweep.clear();
        if self.sweep.is_empty() {
            return Ok(vec![base]);
        }
        let base_value = toml::Value::try_from(&base).map_err(|e| LabError::Config(e.to_string()))?;
        let keys: Vec<&String> = self.sweep.keys().collect();
        let mut out = Vec::with_capacity(self.sweep_size());
        let mut idx = vec![0usize; keys.len()];
        loop {
            let mut v = base_value.clone();
            for (k, &i) in keys.iter().zip(&idx) {
                set_dotted(&mut v, k, self.sweep[*k][i].clone())?;
            }
            let cfg: ExperimentConfig =
                v.try_into().map_err(|e: toml::de::Error| LabError::Config(format!("sweep point invalid: {e}")))?;
            cfg.validate()?;
            out.push(cfg);
            // odometer increment, last key fastest
            let mut pos = keys.len();
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < self.sweep[keys[pos]].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

fn set_dotted(root: &mut toml::Value, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = root;
    for (i, p) in parts.iter().enumerate() {
        let table = cur
            .as_table_mut()
            .ok_or_else(|| LabError::Config(format!("sweep key '{key}': '{p}' is not inside a table")))?;
        if i + 1 == parts.len() {
            table.insert((*p).to_string(), value);
            return Ok(());
        }
        cur = table.entry((*p).to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    Err(LabError::Config(format!("empty sweep key '{key}'")))
}
