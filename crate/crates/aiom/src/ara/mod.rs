//! Reference machine: readability grade assessment. A genre assessor picks
//! the partition block, the block's grade assessor supplies the starting
//! grade, and a pairwise text comparator drives a local search over grades
//! 3–12 against per-grade reference sets.

mod controller;
mod parse;
mod search;
mod types;

pub use controller::AraController;
pub use parse::{
    first_integer_token, parse_comparison, parse_genre, parse_grade, score_span,
    ComparisonParseValidator, GenreNameValidator, GradeParseValidator, COMPARISON_VALIDATOR_ID,
    GENRE_VALIDATOR_ID, GRADE_VALIDATOR_ID,
};
pub use search::{
    comparison_task, comparison_task_id, genre_task, genre_task_id, grade_task, grade_task_id,
    initial_grade, local_search, local_search_from, machine_truth, mean_comparison,
    predict_genre, OracleSet, SearchState, SearchStep, COMPARATOR_ROLE, DEFAULT_THETA,
    DEFAULT_REFERENCES_PER_GRADE, GENRE_ROLE,
};
pub use types::{
    ArticleContent, ComparisonScore, GenrePartition, HaltReason, LabeledArticle, PartitionBlock,
    ReferenceSets, SearchTrace, GRADE_SPAN, MAX_GRADE, MIN_GRADE,
};

use std::sync::Arc;

use thiserror::Error;

use crate::backends::BackendError;
use crate::core::CoreError;

#[derive(Debug, Error)]
pub enum AraError {
    #[error("grade {0} outside the supported span 3..=12")]
    GradeOutOfRange(u8),
    #[error("invalid article: {0}")]
    InvalidArticle(String),
    #[error("genre `{0}` appears in more than one partition block")]
    OverlappingPartition(String),
    #[error("no reference articles for grade {0}")]
    EmptyReferences(u8),
    #[error("comparison score {0} outside [-1, 1]")]
    ScoreOutOfRange(f64),
    #[error("invalid search trace: {0}")]
    InvalidTrace(String),
    #[error("direction threshold must lie strictly inside (0, 1), got {0}")]
    InvalidTheta(f64),
    #[error("no oracle bound for role `{0}`")]
    RoleMissing(String),
    #[error("genre `{0}` belongs to no partition block")]
    GenreNotPartitioned(String),
    #[error("backend for role `{role}` failed: {source}")]
    Backend {
        role: String,
        source: BackendError,
    },
    #[error("branch failed: {0}")]
    BranchFailed(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Corpus files are JSON Lines, one labeled article per line.
pub fn corpus_from_jsonl(input: &str) -> Result<Vec<LabeledArticle>, AraError> {
    let mut articles = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let article: LabeledArticle = serde_json::from_str(line).map_err(|e| {
            AraError::InvalidArticle(format!("line {}: {e}", idx + 1))
        })?;
        articles.push(article);
    }
    Ok(articles)
}

pub fn corpus_to_jsonl(corpus: &[LabeledArticle]) -> String {
    let mut out = String::new();
    for article in corpus {
        out.push_str(&serde_json::to_string(article).expect("article serializes"));
        out.push('\n');
    }
    out
}

/// Register the readability validators and controller on a runtime.
pub fn register(runtime: &mut crate::runtime::Runtime) {
    runtime.validators.register(Arc::new(GenreNameValidator));
    runtime.validators.register(Arc::new(GradeParseValidator));
    runtime
        .validators
        .register(Arc::new(ComparisonParseValidator));
    AraController::register(&mut runtime.controllers);
}
