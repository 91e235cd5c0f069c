//! The readability machine as a runtime controller. Controllers are pure
//! functions of the observed state, so each step rebuilds the search
//! trajectory from the validations recorded so far (task ids encode the
//! grade and reference index) and either emits the next non-adaptive batch
//! of comparison tasks or concludes with the search trace.

use serde_json::Value;

use crate::core::PriorExtract;
use crate::runtime::{
    Controller, ControllerCtx, ControllerRegistry, ControllerStep, MachineState, RuntimeError,
};

use super::parse::parse_comparison;
use super::search::{
    comparison_task, comparison_task_id, genre_task, genre_task_id, grade_task, grade_task_id,
    SearchState, SearchStep, DEFAULT_THETA,
};
use super::types::{GenrePartition, ReferenceSets, GRADE_SPAN};

pub struct AraController {
    partition: GenrePartition,
    refs: ReferenceSets,
    theta: f64,
}

enum TaskView<'a> {
    Missing,
    Waiting,
    Failed,
    Resolved(&'a str),
}

fn view<'a>(state: &'a MachineState, id: &str) -> TaskView<'a> {
    if state.is_failed(id) {
        return TaskView::Failed;
    }
    match state.validation(id) {
        Some(outcome) if outcome.satisfies_dependency() => TaskView::Resolved(
            outcome
                .extracted_spans
                .first()
                .map(String::as_str)
                .unwrap_or(""),
        ),
        Some(_) => TaskView::Waiting, // invalid, repair retry pending
        None if state.task(id).is_some() => TaskView::Waiting,
        None => TaskView::Missing,
    }
}

impl AraController {
    pub fn new(partition: GenrePartition, refs: ReferenceSets, theta: f64) -> Self {
        Self {
            partition,
            refs,
            theta,
        }
    }

    pub fn register(registry: &mut ControllerRegistry) {
        registry.register("ara", |params| {
            let partition: GenrePartition = params
                .get("partition")
                .cloned()
                .ok_or_else(|| {
                    RuntimeError::Definition("ara controller requires a `partition` param".into())
                })
                .and_then(|v| {
                    serde_json::from_value(v)
                        .map_err(|e| RuntimeError::Definition(format!("partition param: {e}")))
                })?;
            let refs: ReferenceSets = params
                .get("refs")
                .cloned()
                .ok_or_else(|| {
                    RuntimeError::Definition("ara controller requires a `refs` param".into())
                })
                .and_then(|v| {
                    serde_json::from_value(v)
                        .map_err(|e| RuntimeError::Definition(format!("refs param: {e}")))
                })?;
            let theta = params
                .get("theta")
                .and_then(Value::as_f64)
                .unwrap_or(DEFAULT_THETA);
            if !(theta > 0.0 && theta < 1.0) {
                return Err(RuntimeError::Definition(format!(
                    "theta must lie strictly inside (0, 1), got {theta}"
                )));
            }
            Ok(Box::new(AraController::new(partition, refs, theta)))
        });
    }
}

impl Controller for AraController {
    fn step(
        &self,
        state: &MachineState,
        ctx: &ControllerCtx<'_>,
    ) -> Result<ControllerStep, RuntimeError> {
        let doc = ctx.truth.documents().first().ok_or_else(|| {
            RuntimeError::Definition("readability machine needs the input article".into())
        })?;
        let genres = self.partition.genres();

        let genre_id = genre_task_id(&doc.id);
        let genre = match view(state, &genre_id) {
            TaskView::Missing => {
                return Ok(ControllerStep::Continue(vec![genre_task(doc, &genres)]))
            }
            TaskView::Waiting => return Ok(ControllerStep::Continue(vec![])),
            TaskView::Failed => {
                return Ok(ControllerStep::Fail(
                    "genre assessment failed after retry".into(),
                ))
            }
            TaskView::Resolved(span) => span.to_string(),
        };

        let block = self.partition.block_for(&genre).ok_or_else(|| {
            RuntimeError::Definition(format!("genre `{genre}` belongs to no partition block"))
        })?;

        let grade_id = grade_task_id(&doc.id);
        let start = match view(state, &grade_id) {
            TaskView::Missing => {
                let mut task = grade_task(doc, &block.role);
                task.depends_on.insert(genre_id.clone());
                task.prior_extracts.push(PriorExtract {
                    source_task_id: genre_id,
                    text: genre,
                });
                return Ok(ControllerStep::Continue(vec![task]));
            }
            TaskView::Waiting => return Ok(ControllerStep::Continue(vec![])),
            TaskView::Failed => {
                return Ok(ControllerStep::Fail(
                    "grade assessment failed after retry".into(),
                ))
            }
            TaskView::Resolved(span) => span.parse::<u8>().map_err(|_| {
                RuntimeError::Definition(format!("grade validator produced non-integer `{span}`"))
            })?,
        };

        // Replay the search over the comparison rounds recorded so far.
        let mut search = SearchState::start(start);
        while search.rounds() < GRADE_SPAN {
            let grade = search.current();
            let references = self.refs.at(grade);
            if references.is_empty() {
                return Err(RuntimeError::Definition(format!(
                    "no reference articles for grade {grade}"
                )));
            }
            let mut to_emit = Vec::new();
            let mut scores = Vec::with_capacity(references.len());
            let mut waiting = false;
            for (index, reference) in references.iter().enumerate() {
                let cmp_id = comparison_task_id(&doc.id, grade, index);
                match view(state, &cmp_id) {
                    TaskView::Missing => to_emit.push(comparison_task(
                        cmp_id,
                        doc,
                        &reference.to_reference_document(),
                    )),
                    TaskView::Waiting => waiting = true,
                    // Retried once, then the pair counts as indistinguishable.
                    TaskView::Failed => scores.push(0.0),
                    TaskView::Resolved(span) => {
                        scores.push(parse_comparison(span).unwrap_or(0.0))
                    }
                }
            }
            if !to_emit.is_empty() {
                return Ok(ControllerStep::Continue(to_emit));
            }
            if waiting {
                return Ok(ControllerStep::Continue(vec![]));
            }
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            match search.observe(mean, self.theta) {
                SearchStep::Halt(trace) => {
                    let rendered = serde_json::to_string(&trace)
                        .expect("search trace serializes");
                    return Ok(ControllerStep::Finish(rendered));
                }
                SearchStep::Continue(_) => {}
            }
        }
        let rendered =
            serde_json::to_string(&search.cap_trace()).expect("search trace serializes");
        Ok(ControllerStep::Finish(rendered))
    }
}
