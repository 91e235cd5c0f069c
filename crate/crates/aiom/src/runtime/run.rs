//! The run loop: consult the controller, schedule the dispatchable batch
//! over the dependency DAG, query backends (concurrently for non-adaptive
//! batches), validate answers, apply the repair policy, iterate until the
//! machine halts or a limit trips.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;

use crate::backends::{BackendError, OracleBackend, QueryCtx};
use crate::core::{
    render_prompt, Answer, GroundTruth, Modality, QueryTask, TaskSpec, ValidationContext,
    ValidationOutcome, ValidatorRegistry,
};
use crate::parallel;

use super::controller::{ControllerCtx, ControllerRegistry, ControllerStep};
use super::state::MachineState;
use super::transcript::{EventKind, Transcript};
use super::{MachineDefinition, ReplayError, RunFailure, RuntimeError};

/// The executor: validator and controller registries plus the run loop.
pub struct Runtime {
    pub validators: ValidatorRegistry,
    pub controllers: ControllerRegistry,
}

/// A halted run: the final answer when the machine concluded normally, or
/// a diagnostic when a limit tripped or the run stalled.
#[derive(Debug)]
pub struct RunOutput {
    pub final_answer: Option<String>,
    pub halt_diagnostic: Option<String>,
    pub transcript: Transcript,
    pub state: MachineState,
}

impl RunOutput {
    pub fn succeeded(&self) -> bool {
        self.final_answer.is_some()
    }

    /// The run reached a halt (final answer or recorded diagnostic) rather
    /// than aborting.
    pub fn halted_cleanly(&self) -> bool {
        self.final_answer.is_some() || self.halt_diagnostic.is_some()
    }
}

impl Runtime {
    /// Core validators and the echo controller only.
    pub fn bare() -> Self {
        let mut controllers = ControllerRegistry::new();
        super::controller::EchoController::register(&mut controllers);
        Self {
            validators: ValidatorRegistry::core_builtins(),
            controllers,
        }
    }

    /// Everything the shipped machines need: core validators plus the
    /// summarization and readability validators and controllers.
    pub fn with_builtins() -> Self {
        let mut runtime = Self::bare();
        crate::summarizer::register(&mut runtime);
        crate::ara::register(&mut runtime);
        runtime
    }

    /// Execute a machine, constructing backends from its definition.
    pub fn run(
        &self,
        machine: &MachineDefinition,
        truth: &GroundTruth,
        task: &TaskSpec,
        seed: u64,
    ) -> Result<RunOutput, RunFailure> {
        let backends = build_backends(machine).map_err(|error| RunFailure {
            error,
            transcript: Transcript::default(),
        })?;
        self.run_with_backends(machine, &backends, truth, task, seed)
    }

    /// Execute with pre-constructed backends keyed by role.
    pub fn run_with_backends(
        &self,
        machine: &MachineDefinition,
        backends: &BTreeMap<String, Arc<dyn OracleBackend>>,
        truth: &GroundTruth,
        task: &TaskSpec,
        seed: u64,
    ) -> Result<RunOutput, RunFailure> {
        let mut transcript = Transcript::default();
        let mut state = MachineState::new();
        match self.drive(machine, backends, truth, task, seed, &mut state, &mut transcript) {
            Ok(()) => Ok(RunOutput {
                final_answer: state.final_answer.clone(),
                halt_diagnostic: state.halt_diagnostic.clone(),
                transcript,
                state,
            }),
            Err(error) => Err(RunFailure { error, transcript }),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn drive(
        &self,
        machine: &MachineDefinition,
        backends: &BTreeMap<String, Arc<dyn OracleBackend>>,
        truth: &GroundTruth,
        task: &TaskSpec,
        seed: u64,
        state: &mut MachineState,
        transcript: &mut Transcript,
    ) -> Result<(), RuntimeError> {
        machine.validate()?;
        if !self.controllers.contains(&machine.controller.id) {
            return Err(RuntimeError::Definition(format!(
                "controller `{}` is not registered",
                machine.controller.id
            )));
        }
        for binding in &machine.bindings {
            if binding.modality != Modality::Vision && !backends.contains_key(&binding.role) {
                return Err(RuntimeError::Definition(format!(
                    "no backend constructed for role `{}`",
                    binding.role
                )));
            }
        }
        let controller = self.controllers.build(&machine.controller)?;
        let ctx = ControllerCtx { seed, truth, task };
        let limits = machine.limits;

        loop {
            if state.cycle >= limits.max_cycles {
                halt_with_diagnostic(
                    state,
                    transcript,
                    format!("max_cycles limit ({}) exceeded", limits.max_cycles),
                );
                return Ok(());
            }
            state.cycle += 1;

            let mut progressed = false;
            match controller.step(state, &ctx)? {
                ControllerStep::Finish(text) => {
                    state.final_answer = Some(text.clone());
                    state.halted = true;
                    transcript.push(EventKind::Halted, None, json!({ "final_answer": text }));
                    return Ok(());
                }
                ControllerStep::Fail(message) => {
                    return Err(RuntimeError::BranchFailed(message));
                }
                ControllerStep::Continue(new_tasks) => {
                    for new_task in new_tasks {
                        self.admit_task(machine, state, &new_task)?;
                        if state.tasks.len() as u32 >= limits.max_tasks {
                            halt_with_diagnostic(
                                state,
                                transcript,
                                format!("max_tasks limit ({}) exceeded", limits.max_tasks),
                            );
                            return Ok(());
                        }
                        transcript.push(
                            EventKind::TaskCreated,
                            Some(&new_task.id),
                            serde_json::to_value(&new_task).expect("task serializes"),
                        );
                        state.add_task(new_task);
                        progressed = true;
                    }
                }
            }

            detect_cycles(state)?;
            let batch = schedule_dispatchable(state)?;
            if batch.is_empty() {
                if !progressed {
                    halt_with_diagnostic(
                        state,
                        transcript,
                        "stalled: no dispatchable tasks and the controller emitted none".into(),
                    );
                    return Ok(());
                }
                continue;
            }

            if state.dispatches + batch.len() as u32 > limits.max_tasks {
                halt_with_diagnostic(
                    state,
                    transcript,
                    format!(
                        "max_tasks limit ({}) exceeded: {} dispatches already recorded",
                        limits.max_tasks, state.dispatches
                    ),
                );
                return Ok(());
            }

            self.dispatch_batch(machine, backends, truth, seed, batch, state, transcript)?;
        }
    }

    /// Checks a controller-emitted task against the definition: fresh id,
    /// known role, registered validator, edges consistent.
    fn admit_task(
        &self,
        machine: &MachineDefinition,
        state: &MachineState,
        task: &QueryTask,
    ) -> Result<(), RuntimeError> {
        if task.id.is_empty() {
            return Err(RuntimeError::Definition("task id must be non-empty".into()));
        }
        if state.tasks.contains_key(&task.id) {
            return Err(RuntimeError::Definition(format!(
                "duplicate task id `{}`",
                task.id
            )));
        }
        if machine.binding(&task.oracle_role).is_none() {
            return Err(RuntimeError::Definition(format!(
                "task `{}` routes to unknown role `{}`",
                task.id, task.oracle_role
            )));
        }
        if !self.validators.contains(&task.validation_method.validator) {
            return Err(RuntimeError::Definition(format!(
                "task `{}` references unregistered validator `{}`",
                task.id, task.validation_method.validator
            )));
        }
        task.check_edges()?;
        Ok(())
    }

    /// Render, query, validate one non-adaptive batch. Events are recorded
    /// in task-id order regardless of query concurrency.
    #[allow(clippy::too_many_arguments)]
    fn dispatch_batch(
        &self,
        machine: &MachineDefinition,
        backends: &BTreeMap<String, Arc<dyn OracleBackend>>,
        truth: &GroundTruth,
        seed: u64,
        batch: Vec<QueryTask>,
        state: &mut MachineState,
        transcript: &mut Transcript,
    ) -> Result<(), RuntimeError> {
        let timeout = machine.limits.per_query_timeout();

        // Resolve backends first so modality rejection precedes any event.
        let mut items = Vec::with_capacity(batch.len());
        for task in batch {
            let binding = machine
                .binding(&task.oracle_role)
                .expect("role checked at admission");
            if binding.modality == Modality::Vision {
                return Err(RuntimeError::Definition(format!(
                    "role `{}` is bound to the vision modality, which is not dispatchable",
                    task.oracle_role
                )));
            }
            let backend = Arc::clone(backends.get(&task.oracle_role).ok_or_else(|| {
                RuntimeError::Definition(format!(
                    "no backend constructed for role `{}`",
                    task.oracle_role
                ))
            })?);
            let prompt = render_prompt(&task, truth)?;
            transcript.push(
                EventKind::PromptRendered,
                Some(&task.id),
                serde_json::to_value(&prompt).expect("prompt serializes"),
            );
            state.pending.remove(&task.id);
            state.in_flight.insert(task.id.clone());
            items.push((task, backend, prompt));
        }

        let results: Vec<(QueryTask, Result<Answer, BackendError>)> =
            parallel::map_batch(items, move |(task, backend, prompt)| {
                let ctx = QueryCtx::new(seed, &task.id, timeout);
                let result = backend.query(&prompt, &ctx);
                (task, result)
            });

        for (task, result) in results {
            state.in_flight.remove(&task.id);
            state.dispatches += 1;

            let (answer, timed_out) = match result {
                Ok(answer) => (answer, false),
                Err(BackendError::Timeout) => {
                    let mut answer = Answer::new(task.id.clone(), "", "timeout");
                    answer.meta.insert("timeout".into(), "true".into());
                    (answer, true)
                }
                Err(error) => {
                    return Err(RuntimeError::Backend {
                        role: task.oracle_role.clone(),
                        source: error,
                    })
                }
            };

            transcript.push(
                EventKind::AnswerReceived,
                Some(&task.id),
                serde_json::to_value(&answer).expect("answer serializes"),
            );
            state.answers.insert(task.id.clone(), answer.clone());

            let outcome = if timed_out {
                ValidationOutcome::invalid(vec!["timeout".into()])
            } else {
                let vctx = ValidationContext::new(truth, &task.prior_extracts);
                self.validators
                    .validate(&answer, &task.validation_method, &vctx)?
            };
            transcript.push(
                EventKind::Validated,
                Some(&task.id),
                serde_json::to_value(&outcome).expect("outcome serializes"),
            );
            state.validations.insert(task.id.clone(), outcome.clone());

            if !outcome.satisfies_dependency() {
                self.apply_repair_policy(state, task, &outcome);
            }
        }
        Ok(())
    }

    /// Default repair policy: retry the failed task once with its
    /// diagnostics appended to the constraints, then mark the branch failed.
    fn apply_repair_policy(
        &self,
        state: &mut MachineState,
        task: QueryTask,
        outcome: &ValidationOutcome,
    ) {
        if state.retried.contains(&task.id) {
            state.failed.insert(task.id);
            return;
        }
        state.retried.insert(task.id.clone());
        let mut retry = task;
        retry.constraints.extend(outcome.diagnostics.iter().cloned());
        state.pending.insert(retry.id.clone());
        state.tasks.insert(retry.id.clone(), retry);
    }

    /// Re-execute a machine answering every query from the transcript's
    /// recorded answers; the result must be byte-identical to the input.
    pub fn replay(
        &self,
        transcript: &Transcript,
        machine: &MachineDefinition,
        truth: &GroundTruth,
        task: &TaskSpec,
        seed: u64,
    ) -> Result<Transcript, ReplayError> {
        super::replay::replay(self, transcript, machine, truth, task, seed)
    }
}

fn halt_with_diagnostic(state: &mut MachineState, transcript: &mut Transcript, diagnostic: String) {
    state.halted = true;
    state.halt_diagnostic = Some(diagnostic.clone());
    transcript.push(EventKind::Halted, None, json!({ "diagnostic": diagnostic }));
}

fn build_backends(
    machine: &MachineDefinition,
) -> Result<BTreeMap<String, Arc<dyn OracleBackend>>, RuntimeError> {
    let mut backends = BTreeMap::new();
    for binding in &machine.bindings {
        if binding.modality == Modality::Vision {
            // Accepted in definitions; rejected if a task ever routes here.
            continue;
        }
        let config = machine.backends.get(&binding.backend_ref).ok_or_else(|| {
            RuntimeError::Definition(format!(
                "binding `{}` references unknown backend `{}`",
                binding.role, binding.backend_ref
            ))
        })?;
        let backend = config.build().map_err(|source| RuntimeError::Backend {
            role: binding.role.clone(),
            source,
        })?;
        backends.insert(binding.role.clone(), backend);
    }
    Ok(backends)
}

/// The pending tasks whose dependencies are all satisfied (validated valid
/// or partial), in task-id order. Non-adaptive tasks (no dependencies) are
/// all returned together.
pub fn schedule_dispatchable(state: &MachineState) -> Result<Vec<QueryTask>, RuntimeError> {
    if state.halted() {
        return Err(RuntimeError::Definition(
            "cannot schedule on a halted state".into(),
        ));
    }
    detect_cycles(state)?;
    Ok(state
        .pending
        .iter()
        .filter_map(|id| state.tasks.get(id))
        .filter(|task| {
            task.depends_on.iter().all(|dep| {
                state
                    .validations
                    .get(dep)
                    .is_some_and(ValidationOutcome::satisfies_dependency)
            })
        })
        .cloned()
        .collect())
}

/// Depth-first three-color cycle search over the dependency edges of every
/// known task. Dangling references are not cycles; they surface as stalls.
fn detect_cycles(state: &MachineState) -> Result<(), RuntimeError> {
    use std::collections::BTreeMap;

    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut colors: BTreeMap<&str, Color> =
        state.tasks.keys().map(|k| (k.as_str(), Color::White)).collect();

    for start in state.tasks.keys() {
        if colors[start.as_str()] != Color::White {
            continue;
        }
        // Explicit stack of (node, next-edge cursor).
        let mut stack: Vec<(&str, Vec<&str>)> = vec![(
            start.as_str(),
            state.tasks[start.as_str()]
                .depends_on
                .iter()
                .map(String::as_str)
                .collect(),
        )];
        colors.insert(start.as_str(), Color::Gray);
        while let Some((node, edges)) = stack.last_mut() {
            if let Some(next) = edges.pop() {
                if !state.tasks.contains_key(next) {
                    continue;
                }
                match colors[next] {
                    Color::Gray => {
                        return Err(RuntimeError::DependencyCycle(next.to_string()));
                    }
                    Color::White => {
                        colors.insert(next, Color::Gray);
                        stack.push((
                            next,
                            state.tasks[next].depends_on.iter().map(String::as_str).collect(),
                        ));
                    }
                    Color::Black => {}
                }
            } else {
                colors.insert(node, Color::Black);
                stack.pop();
            }
        }
    }
    Ok(())
}
