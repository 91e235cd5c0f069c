//! Controllers: the algorithmic half of a machine. A controller is
//! consulted at the start of a run and after validations land; each step
//! either emits new query-tasks, declares the final answer, or reports an
//! unrecoverable branch failure. Steps must be pure functions of the
//! observed state and the run seed.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;

use crate::core::{GroundTruth, QueryTask, TaskSpec, ValidationMethod};

use super::state::MachineState;
use super::{ControllerSpec, RuntimeError};

pub struct ControllerCtx<'a> {
    pub seed: u64,
    pub truth: &'a GroundTruth,
    pub task: &'a TaskSpec,
}

#[derive(Debug)]
pub enum ControllerStep {
    /// Emit new tasks; an empty list means "nothing new, keep dispatching".
    Continue(Vec<QueryTask>),
    /// Conclude the run with the final answer.
    Finish(String),
    /// An essential branch failed; the run cannot produce an answer.
    Fail(String),
}

pub trait Controller: Send + Sync {
    fn step(
        &self,
        state: &MachineState,
        ctx: &ControllerCtx<'_>,
    ) -> Result<ControllerStep, RuntimeError>;
}

type FactoryFn =
    dyn Fn(&BTreeMap<String, Value>) -> Result<Box<dyn Controller>, RuntimeError> + Send + Sync;

/// Registry of controller factories keyed by id; machines are data plus a
/// registered controller id.
#[derive(Clone, Default)]
pub struct ControllerRegistry {
    factories: BTreeMap<String, Arc<FactoryFn>>,
}

impl ControllerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register<F>(&mut self, id: impl Into<String>, factory: F)
    where
        F: Fn(&BTreeMap<String, Value>) -> Result<Box<dyn Controller>, RuntimeError>
            + Send
            + Sync
            + 'static,
    {
        self.factories.insert(id.into(), Arc::new(factory));
    }

    pub fn contains(&self, id: &str) -> bool {
        self.factories.contains_key(id)
    }

    pub fn build(&self, spec: &ControllerSpec) -> Result<Box<dyn Controller>, RuntimeError> {
        let factory = self.factories.get(&spec.id).ok_or_else(|| {
            RuntimeError::Definition(format!("controller `{}` is not registered", spec.id))
        })?;
        factory(&spec.params)
    }
}

/// Minimal controller: one task carrying the run's task statement, accepted
/// unconditionally; the answer text is the final answer.
pub struct EchoController {
    role: String,
}

pub const ECHO_TASK_ID: &str = "echo";

impl EchoController {
    pub fn new(role: impl Into<String>) -> Self {
        Self { role: role.into() }
    }

    pub fn register(registry: &mut ControllerRegistry) {
        registry.register("echo", |params| {
            let role = params
                .get("role")
                .and_then(Value::as_str)
                .unwrap_or("default");
            Ok(Box::new(EchoController::new(role)))
        });
    }
}

impl Controller for EchoController {
    fn step(
        &self,
        state: &MachineState,
        ctx: &ControllerCtx<'_>,
    ) -> Result<ControllerStep, RuntimeError> {
        if state.is_failed(ECHO_TASK_ID) {
            return Ok(ControllerStep::Fail("echo task failed validation".into()));
        }
        match state.validation(ECHO_TASK_ID) {
            Some(outcome) if outcome.satisfies_dependency() => Ok(ControllerStep::Finish(
                outcome.extracted_spans.join(""),
            )),
            Some(_) => Ok(ControllerStep::Continue(vec![])),
            None if state.task(ECHO_TASK_ID).is_some() => Ok(ControllerStep::Continue(vec![])),
            None => Ok(ControllerStep::Continue(vec![QueryTask::new(
                ECHO_TASK_ID,
                ctx.task.statement.clone(),
                ValidationMethod::new("always-accept"),
                self.role.clone(),
            )])),
        }
    }
}
