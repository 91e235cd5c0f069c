//! aiom — a platform for oracle machines: computations that interleave
//! algorithmic pre-query processing, query/answer generation against
//! pluggable AI backends, and post-answer validation, iterating until a
//! final answer is reached.
//!
//! The crate ships:
//! - [`core`]: the domain types (ground truth, query-tasks with their six
//!   attribute kinds, prompts, answers, validation outcomes) and the
//!   validator registry.
//! - [`backends`]: oracle implementations — live HTTP chat endpoints,
//!   deterministic scripted fixtures, and seeded stochastic simulators.
//! - [`runtime`]: the machine executor — dependency-aware scheduling,
//!   batch dispatch, validation-gated iteration, replayable transcripts.
//! - [`summarizer`]: a reference machine for controlled topic
//!   summarization (relevance scoring, diversity ranking, budgeted
//!   selection, coverage/redundancy validation).
//! - [`ara`]: a reference machine for readability grade assessment via
//!   local search over grades 3–12 driven by pairwise comparisons.
//! - [`sim`]: a Monte Carlo harness measuring how much the local search
//!   improves over a noisy assessor baseline on synthetic corpora.
//!
//! Scripted and stochastic backends are fully deterministic given a run
//! seed: per-call randomness derives from (run seed, task id), never from
//! scheduling order, so transcripts are byte-reproducible and replayable.

pub mod ara;
pub mod backends;
pub mod config;
pub mod core;
pub mod parallel;
pub mod runtime;
pub mod sim;
pub mod summarizer;
pub mod text;
