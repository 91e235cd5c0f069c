//! The evolving state of one machine run. Owned and mutated exclusively by
//! the run loop; controllers observe it read-only.

use std::collections::{BTreeMap, BTreeSet};

use crate::core::{Answer, QueryTask, ValidationOutcome};

#[derive(Debug, Default)]
pub struct MachineState {
    /// Every task created during the run, keyed by id. Retries replace the
    /// stored task (constraints grow) but keep the id.
    pub(crate) tasks: BTreeMap<String, QueryTask>,
    pub(crate) pending: BTreeSet<String>,
    pub(crate) in_flight: BTreeSet<String>,
    pub(crate) answers: BTreeMap<String, Answer>,
    pub(crate) validations: BTreeMap<String, ValidationOutcome>,
    /// Tasks whose repair retry was exhausted.
    pub(crate) failed: BTreeSet<String>,
    pub(crate) retried: BTreeSet<String>,
    pub(crate) cycle: u32,
    pub(crate) dispatches: u32,
    pub(crate) halted: bool,
    pub(crate) final_answer: Option<String>,
    pub(crate) halt_diagnostic: Option<String>,
}

impl MachineState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn task(&self, id: &str) -> Option<&QueryTask> {
        self.tasks.get(id)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &QueryTask> {
        self.tasks.values()
    }

    pub fn pending_ids(&self) -> &BTreeSet<String> {
        &self.pending
    }

    pub fn answer(&self, id: &str) -> Option<&Answer> {
        self.answers.get(id)
    }

    pub fn validation(&self, id: &str) -> Option<&ValidationOutcome> {
        self.validations.get(id)
    }

    pub fn is_failed(&self, id: &str) -> bool {
        self.failed.contains(id)
    }

    /// Resolved means the task can no longer change: its validation
    /// satisfies dependencies, or its repair budget is exhausted.
    pub fn is_resolved(&self, id: &str) -> bool {
        self.failed.contains(id)
            || self
                .validations
                .get(id)
                .is_some_and(ValidationOutcome::satisfies_dependency)
    }

    pub fn cycle(&self) -> u32 {
        self.cycle
    }

    pub fn dispatches(&self) -> u32 {
        self.dispatches
    }

    pub fn halted(&self) -> bool {
        self.halted
    }

    pub fn final_answer(&self) -> Option<&str> {
        self.final_answer.as_deref()
    }

    pub fn halt_diagnostic(&self) -> Option<&str> {
        self.halt_diagnostic.as_deref()
    }

    pub(crate) fn add_task(&mut self, task: QueryTask) {
        self.pending.insert(task.id.clone());
        self.tasks.insert(task.id.clone(), task);
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        if self.pending.intersection(&self.in_flight).next().is_some() {
            return Err("pending and in-flight sets overlap".into());
        }
        for id in self.validations.keys() {
            if !self.answers.contains_key(id) {
                return Err(format!("validation for `{id}` lacks an answer"));
            }
        }
        if self.halted && self.final_answer.is_none() && self.halt_diagnostic.is_none() {
            return Err("halted without final answer or diagnostic".into());
        }
        Ok(())
    }
}
