//! The local-search phase: predict the genre, compute a starting grade
//! from the genre block's assessor, then walk the grade ladder one step at
//! a time driven by the mean pairwise comparison against that grade's
//! reference set, until the mean falls inside the threshold, a boundary or
//! revisit is hit, or the round cap trips.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use crate::backends::{OracleBackend, QueryCtx};
use crate::core::{
    render_prompt, ContextExcerpt, Document, GroundTruth, QueryTask, ValidationMethod,
};

use super::parse::{
    genre_retry_constraint, parse_comparison, parse_genre, parse_grade,
    COMPARISON_RETRY_CONSTRAINT, COMPARISON_VALIDATOR_ID, GENRE_VALIDATOR_ID,
    GRADE_RETRY_CONSTRAINT, GRADE_VALIDATOR_ID,
};
use super::types::{
    GenrePartition, HaltReason, ReferenceSets, SearchTrace, GRADE_SPAN, MAX_GRADE, MIN_GRADE,
};
use super::AraError;

pub const GENRE_ROLE: &str = "genre-assessor";
pub const COMPARATOR_ROLE: &str = "text-comparator";
pub const DEFAULT_THETA: f64 = 0.2;
pub const DEFAULT_REFERENCES_PER_GRADE: usize = 5;

/// Role-addressed oracle backends plus the run seed that anchors their
/// determinism.
pub struct OracleSet {
    backends: BTreeMap<String, Arc<dyn OracleBackend>>,
    run_seed: u64,
    timeout: Duration,
}

impl OracleSet {
    pub fn new(backends: BTreeMap<String, Arc<dyn OracleBackend>>, run_seed: u64) -> Self {
        Self {
            backends,
            run_seed,
            timeout: Duration::from_secs(30),
        }
    }

    pub fn run_seed(&self) -> u64 {
        self.run_seed
    }

    fn backend(&self, role: &str) -> Result<&Arc<dyn OracleBackend>, AraError> {
        self.backends
            .get(role)
            .ok_or_else(|| AraError::RoleMissing(role.to_string()))
    }

    /// Render, query, parse; on an unparseable answer, retry once with the
    /// corrective constraint appended, then give up (`Ok(None)`).
    fn ask<T>(
        &self,
        mut task: QueryTask,
        truth: &GroundTruth,
        parse: impl Fn(&str) -> Option<T>,
        retry_constraint: &str,
    ) -> Result<Option<T>, AraError> {
        let backend = self.backend(&task.oracle_role)?;
        for attempt in 0..2 {
            let prompt = render_prompt(&task, truth)?;
            let ctx = QueryCtx::new(self.run_seed, &task.id, self.timeout);
            let answer = backend.query(&prompt, &ctx).map_err(|source| {
                AraError::Backend {
                    role: task.oracle_role.clone(),
                    source,
                }
            })?;
            if let Some(value) = parse(&answer.text) {
                return Ok(Some(value));
            }
            if attempt == 0 {
                task.constraints.push(retry_constraint.to_string());
            }
        }
        Ok(None)
    }
}

pub fn genre_task_id(article_id: &str) -> String {
    format!("genre:{article_id}")
}

pub fn grade_task_id(article_id: &str) -> String {
    format!("grade:{article_id}")
}

pub fn comparison_task_id(article_id: &str, grade: u8, ref_index: usize) -> String {
    format!("cmp:{article_id}:g{grade:02}:r{ref_index:02}")
}

pub fn genre_task(doc: &Document, genres: &[String]) -> QueryTask {
    let mut task = QueryTask::new(
        genre_task_id(&doc.id),
        "Identify the genre of the article.",
        ValidationMethod::new(GENRE_VALIDATOR_ID)
            .with_param("genres", serde_json::json!(genres)),
        GENRE_ROLE,
    );
    task.context_excerpts.push(ContextExcerpt {
        document_id: doc.id.clone(),
        text: doc.body.clone(),
    });
    task.requirements.push(genre_retry_constraint(genres));
    task
}

pub fn grade_task(doc: &Document, role: &str) -> QueryTask {
    let mut task = QueryTask::new(
        grade_task_id(&doc.id),
        "Assess the school grade level of the article.",
        ValidationMethod::new(GRADE_VALIDATOR_ID),
        role,
    );
    task.context_excerpts.push(ContextExcerpt {
        document_id: doc.id.clone(),
        text: doc.body.clone(),
    });
    task.requirements.push(GRADE_RETRY_CONSTRAINT.to_string());
    task
}

/// The input article comes first in the context, the reference second;
/// comparator backends rely on that order.
pub fn comparison_task(id: String, doc: &Document, reference: &Document) -> QueryTask {
    let mut task = QueryTask::new(
        id,
        "Compare the difficulty of the two articles.",
        ValidationMethod::new(COMPARISON_VALIDATOR_ID),
        COMPARATOR_ROLE,
    );
    task.context_excerpts.push(ContextExcerpt {
        document_id: doc.id.clone(),
        text: doc.body.clone(),
    });
    task.context_excerpts.push(ContextExcerpt {
        document_id: reference.id.clone(),
        text: reference.body.clone(),
    });
    task.requirements.push(
        "Answer 'harder' if the first article is more difficult than the second, \
         'easier' if it is less difficult, otherwise 'same'."
            .to_string(),
    );
    task
}

/// Ground truth for a full readability machine run: the input article plus
/// every reference article.
pub fn machine_truth(doc: &Document, refs: &ReferenceSets) -> Result<GroundTruth, AraError> {
    let mut documents = vec![doc.clone()];
    for grade in MIN_GRADE..=MAX_GRADE {
        for reference in refs.at(grade) {
            documents.push(reference.to_reference_document());
        }
    }
    Ok(GroundTruth::new(documents)?)
}

/// Predict the genre of the article; one retry with the corrective
/// constraint, then the branch fails.
pub fn predict_genre(
    doc: &Document,
    genres: &[String],
    oracles: &OracleSet,
) -> Result<String, AraError> {
    let truth = GroundTruth::new(vec![doc.clone()])?;
    let task = genre_task(doc, genres);
    oracles
        .ask(
            task,
            &truth,
            |answer| parse_genre(answer, genres),
            &genre_retry_constraint(genres),
        )?
        .ok_or_else(|| AraError::BranchFailed("genre assessment failed after retry".into()))
}

/// Starting point for the search: the grade predicted by the block's
/// assessor for the predicted genre, clamped to [3, 12].
pub fn initial_grade(
    doc: &Document,
    partition: &GenrePartition,
    genre: &str,
    oracles: &OracleSet,
) -> Result<u8, AraError> {
    let block = partition
        .block_for(genre)
        .ok_or_else(|| AraError::GenreNotPartitioned(genre.to_string()))?;
    let truth = GroundTruth::new(vec![doc.clone()])?;
    let task = grade_task(doc, &block.role);
    oracles
        .ask(task, &truth, parse_grade, GRADE_RETRY_CONSTRAINT)?
        .ok_or_else(|| AraError::BranchFailed("grade assessment failed after retry".into()))
}

/// Mean comparison score of the article against every reference at one
/// grade. A pair that stays unparseable after its retry contributes 0.
pub fn mean_comparison(
    doc: &Document,
    grade: u8,
    refs: &ReferenceSets,
    oracles: &OracleSet,
) -> Result<f64, AraError> {
    let references = refs.at(grade);
    if references.is_empty() {
        return Err(AraError::EmptyReferences(grade));
    }
    let mut sum = 0.0;
    for (index, reference) in references.iter().enumerate() {
        let ref_doc = reference.to_reference_document();
        let truth = GroundTruth::new(vec![doc.clone(), ref_doc.clone()])?;
        let task = comparison_task(comparison_task_id(&doc.id, grade, index), doc, &ref_doc);
        let score = oracles
            .ask(task, &truth, parse_comparison, COMPARISON_RETRY_CONSTRAINT)?
            .unwrap_or(0.0);
        sum += score;
    }
    Ok(sum / references.len() as f64)
}

/// One step of the search given the mean score at the current grade.
#[derive(Debug)]
pub enum SearchStep {
    Continue(u8),
    Halt(SearchTrace),
}

/// The pure decision core of the local search, shared by the direct ops
/// and the runtime controller so both walk identical paths.
#[derive(Debug, Clone)]
pub struct SearchState {
    visited: Vec<(u8, f64)>,
    current: u8,
}

impl SearchState {
    pub fn start(initial: u8) -> Self {
        Self {
            visited: Vec::new(),
            current: initial.clamp(MIN_GRADE, MAX_GRADE),
        }
    }

    pub fn current(&self) -> u8 {
        self.current
    }

    pub fn rounds(&self) -> usize {
        self.visited.len()
    }

    /// Record the mean at the current grade and decide: halt inside the
    /// threshold; step up or down by one; halt at a boundary; on a revisit
    /// halt with whichever frontier grade has the smaller |mean| (ties to
    /// the lower grade).
    pub fn observe(&mut self, mean: f64, theta: f64) -> SearchStep {
        self.visited.push((self.current, mean));
        if mean.abs() <= theta {
            return SearchStep::Halt(self.trace(HaltReason::WithinThreshold, self.current));
        }
        let next = self.current as i16 + if mean > theta { 1 } else { -1 };
        if !(MIN_GRADE as i16..=MAX_GRADE as i16).contains(&next) {
            return SearchStep::Halt(self.trace(HaltReason::Boundary, self.current));
        }
        let next = next as u8;
        if let Some(&(_, earlier_mean)) = self.visited.iter().find(|(g, _)| *g == next) {
            let final_grade = if earlier_mean.abs() < mean.abs() {
                next
            } else if mean.abs() < earlier_mean.abs() {
                self.current
            } else {
                next.min(self.current)
            };
            return SearchStep::Halt(self.trace(HaltReason::Oscillation, final_grade));
        }
        self.current = next;
        SearchStep::Continue(next)
    }

    pub fn cap_trace(&self) -> SearchTrace {
        self.trace(HaltReason::IterationCap, self.current)
    }

    fn trace(&self, halt_reason: HaltReason, final_grade: u8) -> SearchTrace {
        SearchTrace {
            visited: self.visited.clone(),
            final_grade,
            halt_reason,
        }
    }
}

/// Run the full local search: genre, starting grade, then threshold-driven
/// grade walking.
pub fn local_search(
    doc: &Document,
    partition: &GenrePartition,
    refs: &ReferenceSets,
    theta: f64,
    oracles: &OracleSet,
) -> Result<SearchTrace, AraError> {
    check_theta(theta)?;
    let genres = partition.genres();
    let genre = predict_genre(doc, &genres, oracles)?;
    let start = initial_grade(doc, partition, &genre, oracles)?;
    local_search_from(doc, start, refs, theta, oracles)
}

/// The search phase alone, from an explicit starting grade.
pub fn local_search_from(
    doc: &Document,
    start: u8,
    refs: &ReferenceSets,
    theta: f64,
    oracles: &OracleSet,
) -> Result<SearchTrace, AraError> {
    check_theta(theta)?;
    let mut state = SearchState::start(start);
    while state.rounds() < GRADE_SPAN {
        let mean = mean_comparison(doc, state.current(), refs, oracles)?;
        match state.observe(mean, theta) {
            SearchStep::Halt(trace) => return Ok(trace),
            SearchStep::Continue(_) => {}
        }
    }
    Ok(state.cap_trace())
}

fn check_theta(theta: f64) -> Result<(), AraError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(AraError::InvalidTheta(theta));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ara::types::LabeledArticle;
    use crate::backends::StochasticBackend;
    use std::collections::BTreeMap as Map;

    fn sign_comparator_oracles(seed: u64) -> OracleSet {
        let comparator: Arc<dyn OracleBackend> =
            Arc::new(StochasticBackend::new("sign-comparator", Map::new()).unwrap());
        OracleSet::new(Map::from([(COMPARATOR_ROLE.to_string(), comparator)]), seed)
    }

    fn refs_sigma_zero() -> ReferenceSets {
        let mut per_grade = std::collections::BTreeMap::new();
        for grade in MIN_GRADE..=MAX_GRADE {
            per_grade.insert(
                grade,
                (0..5)
                    .map(|i| {
                        LabeledArticle::synthetic(
                            format!("ref-{grade}-{i}"),
                            grade as f64,
                            "genre-00",
                            grade,
                        )
                        .unwrap()
                    })
                    .collect(),
            );
        }
        ReferenceSets::new(per_grade).unwrap()
    }

    fn synthetic_doc(difficulty: f64, grade: u8) -> Document {
        LabeledArticle::synthetic("input", difficulty, "genre-00", grade)
            .unwrap()
            .to_document()
    }

    #[test]
    fn mean_of_listed_scores_is_arithmetic() {
        // [+1, +1, 0, +1, +1] → 0.8.
        let scores = [1.0, 1.0, 0.0, 1.0, 1.0];
        let mean: f64 = scores.iter().sum::<f64>() / scores.len() as f64;
        assert!((mean - 0.8).abs() < 1e-12);
    }

    #[test]
    fn sign_comparator_on_all_easier_refs_gives_plus_one() {
        // Brute force over the sign function: the input sits at difficulty
        // 8, every grade-5 reference at 5, so every pair answers harder.
        let oracles = sign_comparator_oracles(7);
        let doc = synthetic_doc(8.0, 8);
        let mean = mean_comparison(&doc, 5, &refs_sigma_zero(), &oracles).unwrap();
        assert_eq!(mean, 1.0);
    }

    #[test]
    fn indistinguishable_refs_give_zero_mean() {
        let oracles = sign_comparator_oracles(7);
        let doc = synthetic_doc(8.0, 8);
        let mean = mean_comparison(&doc, 8, &refs_sigma_zero(), &oracles).unwrap();
        assert_eq!(mean, 0.0);
    }

    #[test]
    fn search_walks_from_five_to_the_true_grade_eight() {
        // Hand simulation of the documented rule with the sign comparator:
        // means +1 at 5, 6, 7 then 0 at 8 → within-threshold halt at 8.
        let oracles = sign_comparator_oracles(7);
        let doc = synthetic_doc(8.0, 8);
        let trace =
            local_search_from(&doc, 5, &refs_sigma_zero(), DEFAULT_THETA, &oracles).unwrap();
        assert_eq!(
            trace.visited.iter().map(|(g, _)| *g).collect::<Vec<_>>(),
            vec![5, 6, 7, 8]
        );
        assert_eq!(trace.final_grade, 8);
        assert_eq!(trace.halt_reason, HaltReason::WithinThreshold);
        trace.check_invariants().unwrap();
    }

    #[test]
    fn starting_at_the_true_grade_halts_immediately() {
        let oracles = sign_comparator_oracles(7);
        let doc = synthetic_doc(8.0, 8);
        let trace =
            local_search_from(&doc, 8, &refs_sigma_zero(), DEFAULT_THETA, &oracles).unwrap();
        assert_eq!(trace.visited.len(), 1);
        assert_eq!(trace.final_grade, 8);
        assert_eq!(trace.halt_reason, HaltReason::WithinThreshold);
    }

    #[test]
    fn upward_push_stops_at_the_boundary() {
        // An input far above every reference keeps answering harder; from
        // 11 the search reaches 12 and halts at the boundary.
        let oracles = sign_comparator_oracles(7);
        let doc = synthetic_doc(40.0, 12);
        let trace =
            local_search_from(&doc, 11, &refs_sigma_zero(), DEFAULT_THETA, &oracles).unwrap();
        assert_eq!(trace.final_grade, 12);
        assert_eq!(trace.halt_reason, HaltReason::Boundary);
        assert_eq!(
            trace.visited.iter().map(|(g, _)| *g).collect::<Vec<_>>(),
            vec![11, 12]
        );
    }

    #[test]
    fn oscillation_picks_the_frontier_grade_with_smaller_mean() {
        let mut state = SearchState::start(6);
        assert!(matches!(state.observe(0.9, 0.2), SearchStep::Continue(7)));
        match state.observe(-0.4, 0.2) {
            SearchStep::Halt(trace) => {
                assert_eq!(trace.halt_reason, HaltReason::Oscillation);
                assert_eq!(trace.final_grade, 7, "|−0.4| < |0.9| keeps the later grade");
            }
            other => panic!("expected oscillation halt, got {other:?}"),
        }

        let mut state = SearchState::start(6);
        assert!(matches!(state.observe(0.4, 0.2), SearchStep::Continue(7)));
        match state.observe(-0.4, 0.2) {
            SearchStep::Halt(trace) => {
                assert_eq!(trace.final_grade, 6, "tie on |mean| takes the lower grade");
            }
            other => panic!("expected oscillation halt, got {other:?}"),
        }
    }

    #[test]
    fn theta_outside_unit_interval_is_rejected() {
        let oracles = sign_comparator_oracles(7);
        let doc = synthetic_doc(8.0, 8);
        for theta in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(matches!(
                local_search_from(&doc, 5, &refs_sigma_zero(), theta, &oracles),
                Err(AraError::InvalidTheta(_))
            ));
        }
    }

    #[test]
    fn unparseable_comparisons_count_as_zero_after_retry() {
        let gibberish: Arc<dyn OracleBackend> = Arc::new(
            crate::backends::ScriptedBackend::constant("fixture", "no usable words here"),
        );
        let oracles = OracleSet::new(
            Map::from([(COMPARATOR_ROLE.to_string(), gibberish)]),
            7,
        );
        let doc = synthetic_doc(8.0, 8);
        let mean = mean_comparison(&doc, 5, &refs_sigma_zero(), &oracles).unwrap();
        assert_eq!(mean, 0.0);
    }

    #[test]
    fn missing_comparator_role_is_an_error() {
        let oracles = OracleSet::new(Map::new(), 7);
        let doc = synthetic_doc(8.0, 8);
        assert!(matches!(
            mean_comparison(&doc, 5, &refs_sigma_zero(), &oracles),
            Err(AraError::RoleMissing(_))
        ));
    }
}
