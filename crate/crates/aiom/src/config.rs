//! Machine configuration files: a strict JSON schema (unknown fields are
//! rejected) describing the controller, the oracle bindings with their
//! backends, run limits, the seed, and optionally the run input.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Document, GroundTruth, Modality, OracleBinding, TaskSpec};
use crate::runtime::{BackendConfig, ControllerSpec, MachineDefinition, RunLimits};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineConfig {
    pub machine: String,
    pub controller: ControllerSpec,
    pub oracles: Vec<OracleConfig>,
    #[serde(default)]
    pub limits: RunLimits,
    #[serde(default)]
    pub seed: u64,
    /// Optional embedded run input, so a config file fully describes a
    /// reproducible run (and its replay).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub role: String,
    pub modality: Modality,
    pub backend: BackendConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub documents: Vec<Document>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskSpec>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error at line {line}, column {column}: {detail}")]
    Parse {
        line: usize,
        column: usize,
        detail: String,
    },
    #[error("config schema violation at line {line}, column {column}: {detail}")]
    Schema {
        line: usize,
        column: usize,
        detail: String,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Parse a config file; syntax errors carry line/column, schema violations
/// name the offending field.
pub fn load_config(path: &Path) -> Result<MachineConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<MachineConfig, ConfigError> {
    match serde_json::from_str::<MachineConfig>(text) {
        Ok(config) => Ok(config),
        Err(e) => {
            let (line, column, detail) = (e.line(), e.column(), e.to_string());
            if e.is_syntax() || e.is_eof() {
                Err(ConfigError::Parse {
                    line,
                    column,
                    detail,
                })
            } else {
                Err(ConfigError::Schema {
                    line,
                    column,
                    detail,
                })
            }
        }
    }
}

impl MachineConfig {
    /// Lower the config to a runtime machine definition. Backend refs are
    /// the role names; each oracle entry carries its backend inline.
    pub fn to_definition(&self) -> MachineDefinition {
        let mut backends = BTreeMap::new();
        let mut bindings = Vec::with_capacity(self.oracles.len());
        for oracle in &self.oracles {
            bindings.push(OracleBinding::new(
                oracle.role.clone(),
                oracle.modality,
                oracle.role.clone(),
            ));
            backends.insert(oracle.role.clone(), oracle.backend.clone());
        }
        MachineDefinition {
            name: self.machine.clone(),
            bindings,
            backends,
            controller: self.controller.clone(),
            limits: self.limits,
        }
    }

    /// The embedded run input, when present.
    pub fn input_truth(&self) -> Result<GroundTruth, ConfigError> {
        match &self.input {
            Some(input) => GroundTruth::new(input.documents.clone())
                .map_err(|e| ConfigError::Invalid(e.to_string())),
            None => Ok(GroundTruth::empty()),
        }
    }

    pub fn input_task(&self) -> Option<TaskSpec> {
        self.input.as_ref().and_then(|i| i.task.clone())
    }

    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
