//! Machine definitions: the oracle bindings (the machine's oracle set),
//! the controller driving it, backend construction data, and run limits
//! that guarantee halting.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::backends::{
    BackendError, HttpBackend, HttpBackendConfig, OracleBackend, RuleMatcher, ScriptedBackend,
    ScriptedRule, StochasticBackend, DEFAULT_CREDENTIAL_ENV,
};
use crate::core::OracleBinding;

use super::RuntimeError;

/// Controller id plus machine-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Value>,
}

impl ControllerSpec {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: Value) -> Self {
        self.params.insert(key.into(), value);
        self
    }
}

/// Hard bounds that guarantee a run halts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunLimits {
    #[serde(default = "default_max_tasks")]
    pub max_tasks: u32,
    #[serde(default = "default_max_cycles")]
    pub max_cycles: u32,
    #[serde(default = "default_per_query_timeout_ms")]
    pub per_query_timeout_ms: u64,
}

fn default_max_tasks() -> u32 {
    256
}
fn default_max_cycles() -> u32 {
    512
}
fn default_per_query_timeout_ms() -> u64 {
    30_000
}

impl Default for RunLimits {
    fn default() -> Self {
        Self {
            max_tasks: default_max_tasks(),
            max_cycles: default_max_cycles(),
            per_query_timeout_ms: default_per_query_timeout_ms(),
        }
    }
}

impl RunLimits {
    pub fn new(max_tasks: u32, max_cycles: u32, per_query_timeout_ms: u64) -> Self {
        Self {
            max_tasks,
            max_cycles,
            per_query_timeout_ms,
        }
    }

    pub fn per_query_timeout(&self) -> Duration {
        Duration::from_millis(self.per_query_timeout_ms)
    }

    pub fn validate(&self) -> Result<(), RuntimeError> {
        if self.max_tasks == 0 || self.max_cycles == 0 || self.per_query_timeout_ms == 0 {
            return Err(RuntimeError::Definition(
                "run limits must all be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Construction data for one backend, as carried in machine configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum BackendConfig {
    Http(HttpParams),
    Scripted(ScriptedParams),
    Stochastic(StochasticParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
    #[serde(default = "default_credential_env")]
    pub credential_env: String,
}

fn default_credential_env() -> String {
    DEFAULT_CREDENTIAL_ENV.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedParams {
    pub rules: Vec<RuleParams>,
}

/// Exactly one of `substring` or `pattern` must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substring: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticParams {
    pub behavior: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl BackendConfig {
    pub fn build(&self) -> Result<Arc<dyn OracleBackend>, BackendError> {
        match self {
            BackendConfig::Http(p) => Ok(Arc::new(HttpBackend::new(HttpBackendConfig {
                endpoint: p.endpoint.clone(),
                model: p.model.clone(),
                temperature: p.temperature,
                timeout: p.timeout_ms.map(Duration::from_millis),
                credential_env: p.credential_env.clone(),
            })?)),
            BackendConfig::Scripted(p) => {
                let mut rules = Vec::with_capacity(p.rules.len());
                for rule in &p.rules {
                    let matcher = match (&rule.substring, &rule.pattern) {
                        (Some(s), None) => RuleMatcher::Substring(s.clone()),
                        (None, Some(p)) => RuleMatcher::Pattern(p.clone()),
                        _ => {
                            return Err(BackendError::Config(
                                "scripted rule needs exactly one of `substring` or `pattern`"
                                    .into(),
                            ))
                        }
                    };
                    rules.push(ScriptedRule {
                        matcher,
                        response: rule.response.clone(),
                    });
                }
                Ok(Arc::new(ScriptedBackend::new("scripted", rules)?))
            }
            BackendConfig::Stochastic(p) => Ok(Arc::new(StochasticBackend::new(
                &p.behavior,
                p.params.clone(),
            )?)),
        }
    }
}

/// A machine: a name, its oracle bindings with backend construction data,
/// the controller program, and run limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineDefinition {
    pub name: String,
    pub bindings: Vec<OracleBinding>,
    pub backends: BTreeMap<String, BackendConfig>,
    pub controller: ControllerSpec,
    #[serde(default)]
    pub limits: RunLimits,
}

impl MachineDefinition {
    pub fn binding(&self, role: &str) -> Option<&OracleBinding> {
        self.bindings.iter().find(|b| b.role == role)
    }

    /// Structural validation: at least one binding, unique role names,
    /// resolvable backend refs, positive limits. Controller registration
    /// is checked by the runtime, which owns the registry.
    pub fn validate(&self) -> Result<(), RuntimeError> {
        if self.bindings.is_empty() {
            return Err(RuntimeError::Definition(
                "machine requires at least one oracle binding".into(),
            ));
        }
        let mut roles = std::collections::BTreeSet::new();
        for binding in &self.bindings {
            if !roles.insert(binding.role.as_str()) {
                return Err(RuntimeError::Definition(format!(
                    "duplicate oracle role `{}`",
                    binding.role
                )));
            }
            if !self.backends.contains_key(&binding.backend_ref) {
                return Err(RuntimeError::Definition(format!(
                    "binding `{}` references unknown backend `{}`",
                    binding.role, binding.backend_ref
                )));
            }
        }
        self.limits.validate()
    }
}
