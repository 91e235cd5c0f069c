//! Desk-scale simulation harness: synthetic corpora, noisy oracle
//! behaviors, Monte Carlo trials of the readability machine, and accuracy
//! reports comparing the local search against the assessor-only baseline.

mod corpus;
mod noise;
mod report;
mod trials;

pub use corpus::{
    corpus_genres, generate_corpus, genre_name, hash_partition, CorpusSpec, DEFAULT_N_GENRES,
    DEFAULT_PARTITION_BLOCKS, DEFAULT_SIGMA,
};
pub use noise::NoiseSpec;
pub use report::{per_trial_csv, AccuracyReport};
pub use trials::{
    perfect_oracle_exhaustive, run_trials, run_trials_seq, sweep_slopes, PerfectCheck,
    SearchConfig, TrialOutcome, TrialsResult,
};

use thiserror::Error;

use crate::ara::AraError;
use crate::backends::BackendError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Ara(#[from] AraError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}
