//! Oracle backends behind a single query interface: a live HTTP model
//! endpoint, a deterministic scripted fixture, and a seeded stochastic
//! simulator.

mod http;
mod scripted;
mod stochastic;

pub use http::{HttpBackend, HttpBackendConfig, DEFAULT_CREDENTIAL_ENV, ENDPOINT_ENV};
pub use scripted::{RuleMatcher, ScriptedBackend, ScriptedRule};
pub use stochastic::StochasticBackend;

use std::time::Duration;

use thiserror::Error;

use crate::core::{Answer, Prompt};

/// Per-call context a backend may use: the run seed and task id anchor any
/// randomness so scheduling order can never perturb results.
#[derive(Debug, Clone)]
pub struct QueryCtx<'a> {
    pub run_seed: u64,
    pub task_id: &'a str,
    pub timeout: Duration,
}

impl<'a> QueryCtx<'a> {
    pub fn new(run_seed: u64, task_id: &'a str, timeout: Duration) -> Self {
        Self {
            run_seed,
            task_id,
            timeout,
        }
    }
}

/// A constructed oracle. Backends are immutable after construction and must
/// tolerate concurrent `query` calls.
pub trait OracleBackend: Send + Sync {
    fn id(&self) -> &str;

    fn query(&self, prompt: &Prompt, ctx: &QueryCtx<'_>) -> Result<Answer, BackendError>;
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("http error {status}: {body}")]
    Http {
        status: u16,
        body: String,
        retryable: bool,
    },
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response body: {0}")]
    MalformedBody(String),
    #[error("no scripted rule matches prompt starting with {prompt_head:?}")]
    FixtureGap { prompt_head: String },
    #[error("unknown stochastic behavior `{id}`")]
    UnknownBehavior { id: String },
    #[error("backend configuration error: {0}")]
    Config(String),
}

impl BackendError {
    /// Whether a retry may help (429/5xx, timeouts, transport failures).
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Http { retryable, .. } => *retryable,
            BackendError::Timeout | BackendError::Transport(_) => true,
            _ => false,
        }
    }
}

/// Stable seed for (run seed, task id); FNV-1a so the value never depends
/// on compiler or std internals.
pub fn derive_seed(run_seed: u64, task_id: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for byte in run_seed.to_le_bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(PRIME);
    }
    for byte in task_id.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}
