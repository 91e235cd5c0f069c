//! Machine execution: dependency-aware scheduling over the query-task DAG,
//! concurrent dispatch of non-adaptive batches, validation-gated iteration
//! with a bounded repair policy, and replayable transcripts.

mod controller;
mod definition;
mod replay;
mod run;
mod state;
mod transcript;

pub use controller::{
    Controller, ControllerCtx, ControllerRegistry, ControllerStep, EchoController, ECHO_TASK_ID,
};
pub use definition::{
    BackendConfig, ControllerSpec, HttpParams, MachineDefinition, RuleParams, RunLimits,
    ScriptedParams, StochasticParams,
};
pub use run::{schedule_dispatchable, RunOutput, Runtime};
pub use state::MachineState;
pub use transcript::{EventKind, Transcript, TranscriptError, TranscriptEvent};

use thiserror::Error;

use crate::backends::BackendError;
use crate::core::CoreError;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("machine definition error: {0}")]
    Definition(String),
    #[error("dependency cycle involving task `{0}`")]
    DependencyCycle(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("backend for role `{role}` failed: {source}")]
    Backend {
        role: String,
        source: BackendError,
    },
    #[error("branch failed: {0}")]
    BranchFailed(String),
}

/// A run that aborted; the partial transcript is preserved for diagnosis.
#[derive(Debug)]
pub struct RunFailure {
    pub error: RuntimeError,
    pub transcript: Transcript,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for RunFailure {}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("transcript has no events")]
    NoEvents,
    #[error("malformed transcript: {0}")]
    Malformed(String),
    #[error("replay diverged at seq {seq}: {detail}")]
    Divergence { seq: u64, detail: String },
    #[error("replay failed: {0}")]
    Failed(String),
}
