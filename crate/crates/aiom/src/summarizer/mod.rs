//! Reference machine: controlled topic summarization. The pre-query stage
//! is oracle-free and fully testable — segment the article, score each
//! sentence's relevance to the topic, rank for relevance and sub-topic
//! diversity, select a budgeted subset — then a single oracle query
//! generates the summary and a coverage/redundancy validator prunes it.

mod controller;
mod validate;

pub use controller::SummarizerController;
pub use validate::{SummaryValidator, COVERAGE_THRESHOLD, REDUNDANCY_THRESHOLD};

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{ContextExcerpt, Document, QueryTask, ValidationMethod};
use crate::text;

pub const SUMMARIZER_ROLE: &str = "summarizer-llm";
pub const DEFAULT_DIVERSITY_WEIGHT: f64 = 0.7;
/// Extracted context may hold up to twice the requested summary length;
/// the oracle compresses from there.
pub const BUDGET_FACTOR: usize = 2;
pub const KEY_TERMS_PER_SENTENCE: usize = 3;

#[derive(Debug, Error)]
pub enum SummarizerError {
    #[error("relevance scores must be set before ranking")]
    RelevanceUnset,
    #[error("diversity weight must lie in [0, 1], got {0}")]
    InvalidDiversityWeight(f64),
    #[error("budget must be at least one word")]
    ZeroBudget,
    #[error("cannot build a summary task without selected sentences")]
    NoSelection,
}

/// One article sentence with its position, topic relevance, and content
/// words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub index: usize,
    pub text: String,
    pub relevance: Option<f64>,
    pub term_set: BTreeSet<String>,
}

/// What the user asked for: topic, length budget, and the trade-off
/// between relevance and sub-topic diversity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarySpec {
    pub topic: String,
    pub budget_words: usize,
    pub diversity_weight: f64,
}

impl SummarySpec {
    pub fn new(topic: impl Into<String>, budget_words: usize) -> Result<Self, SummarizerError> {
        if budget_words == 0 {
            return Err(SummarizerError::ZeroBudget);
        }
        Ok(Self {
            topic: topic.into(),
            budget_words,
            diversity_weight: DEFAULT_DIVERSITY_WEIGHT,
        })
    }

    pub fn with_diversity_weight(mut self, weight: f64) -> Result<Self, SummarizerError> {
        if !(0.0..=1.0).contains(&weight) || weight.is_nan() {
            return Err(SummarizerError::InvalidDiversityWeight(weight));
        }
        self.diversity_weight = weight;
        Ok(self)
    }
}

/// Split the article body into sentence records; relevance is left unset.
/// An empty body yields an empty list.
pub fn segment_sentences(doc: &Document) -> Vec<SentenceRecord> {
    text::split_sentences(&doc.body)
        .into_iter()
        .enumerate()
        .map(|(index, sentence)| SentenceRecord {
            index,
            term_set: text::content_words(&sentence).into_iter().collect(),
            text: sentence,
            relevance: None,
        })
        .collect()
}

/// Cosine similarity between the content-word TF vectors of the sentence
/// and the topic; zero when either side has no content words.
pub fn score_relevance(sentence: &SentenceRecord, topic: &str) -> f64 {
    text::tf_cosine(&sentence.text, topic)
}

/// Fill in relevance scores for every sentence.
pub fn score_all(mut sentences: Vec<SentenceRecord>, topic: &str) -> Vec<SentenceRecord> {
    for sentence in &mut sentences {
        sentence.relevance = Some(score_relevance(sentence, topic));
    }
    sentences
}

/// Greedy maximal-marginal-relevance ordering: the next pick maximizes
/// λ·relevance − (1−λ)·max-similarity-to-selected, ties broken by lower
/// sentence index. λ = 1 degenerates to pure relevance order.
pub fn rank_diverse(
    sentences: &[SentenceRecord],
    spec: &SummarySpec,
) -> Result<Vec<SentenceRecord>, SummarizerError> {
    let lambda = spec.diversity_weight;
    let relevances: Vec<f64> = sentences
        .iter()
        .map(|s| s.relevance.ok_or(SummarizerError::RelevanceUnset))
        .collect::<Result<_, _>>()?;
    let frequencies: Vec<_> = sentences
        .iter()
        .map(|s| text::term_frequencies(&s.text))
        .collect();

    let mut selected: Vec<usize> = Vec::with_capacity(sentences.len());
    let mut remaining: Vec<usize> = (0..sentences.len()).collect();
    while !remaining.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for &candidate in &remaining {
            let max_sim = selected
                .iter()
                .map(|&s| text::cosine_of_frequencies(&frequencies[candidate], &frequencies[s]))
                .fold(0.0_f64, f64::max);
            let score = lambda * relevances[candidate] - (1.0 - lambda) * max_sim;
            // Strict comparison over ascending indices keeps the lower
            // index on ties.
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((candidate, score));
            }
        }
        let (pick, _) = best.expect("remaining is non-empty");
        selected.push(pick);
        remaining.retain(|&i| i != pick);
    }
    Ok(selected.into_iter().map(|i| sentences[i].clone()).collect())
}

/// Take the ranked prefix while the cumulative word count stays within
/// twice the budget (always at least one sentence), then restore article
/// order.
pub fn select_budget(ranked: &[SentenceRecord], spec: &SummarySpec) -> Vec<SentenceRecord> {
    let cap = spec.budget_words * BUDGET_FACTOR;
    let mut cumulative = 0usize;
    let mut chosen: Vec<SentenceRecord> = Vec::new();
    for sentence in ranked {
        let words = text::word_count(&sentence.text);
        if !chosen.is_empty() && cumulative + words > cap {
            break;
        }
        cumulative += words;
        chosen.push(sentence.clone());
    }
    chosen.sort_by_key(|s| s.index);
    chosen
}

/// The top content terms of each selected sentence, clustered across
/// sentences by shared stem. Cluster order and membership are
/// deterministic.
pub fn key_term_clusters(selected: &[SentenceRecord]) -> Vec<Vec<String>> {
    use std::collections::BTreeMap;

    let mut clusters: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for sentence in selected {
        let mut counts: Vec<(String, usize)> = Vec::new();
        for word in text::content_words(&sentence.text) {
            match counts.iter_mut().find(|(w, _)| *w == word) {
                Some((_, n)) => *n += 1,
                None => counts.push((word, 1)),
            }
        }
        // Highest count first; first occurrence wins ties (stable sort).
        counts.sort_by_key(|&(_, n)| std::cmp::Reverse(n));
        for (term, _) in counts.into_iter().take(KEY_TERMS_PER_SENTENCE) {
            clusters.entry(text::stem(&term)).or_default().insert(term);
        }
    }
    clusters
        .into_values()
        .map(|terms| terms.into_iter().collect())
        .collect()
}

/// Build the single oracle query of the pipeline: the selected sentences
/// (plus the title) as context, the word budget as a requirement, and the
/// coverage/redundancy validator armed with the topic terms and key-term
/// clusters.
pub fn build_summary_task(
    selected: &[SentenceRecord],
    doc: &Document,
    spec: &SummarySpec,
) -> Result<QueryTask, SummarizerError> {
    if selected.is_empty() {
        return Err(SummarizerError::NoSelection);
    }
    let clusters = key_term_clusters(selected);
    let topic_terms: Vec<String> = text::content_words(&spec.topic);

    let mut task = QueryTask::new(
        "summary",
        format!(
            "Write a summary of the topic \"{}\" using only the provided context sentences from the article.",
            spec.topic
        ),
        ValidationMethod::new(validate::VALIDATOR_ID)
            .with_param("topic", serde_json::json!(spec.topic))
            .with_param("topic_terms", serde_json::json!(topic_terms))
            .with_param("key_term_clusters", serde_json::json!(clusters)),
        SUMMARIZER_ROLE,
    );
    for sentence in selected {
        task.context_excerpts.push(ContextExcerpt {
            document_id: doc.id.clone(),
            text: sentence.text.clone(),
        });
    }
    task.context_excerpts.push(ContextExcerpt {
        document_id: doc.id.clone(),
        text: doc.title.clone(),
    });
    task.requirements.push(format!(
        "Cover every significant aspect of the topic \"{}\".",
        spec.topic
    ));
    task.requirements
        .push(format!("Use at most {} words.", spec.budget_words));
    Ok(task)
}

pub use validate::validate_summary;

/// Register the summarization validator and controller on a runtime.
pub fn register(runtime: &mut crate::runtime::Runtime) {
    runtime.validators.register(Arc::new(SummaryValidator));
    SummarizerController::register(&mut runtime.controllers);
}
