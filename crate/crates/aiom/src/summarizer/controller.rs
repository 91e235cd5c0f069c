//! The summarizer machine as a runtime controller: one pre-query pass over
//! the article builds the single summary query-task; the pruned spans of
//! its validated answer are the final summary.

use serde_json::Value;

use crate::runtime::{
    Controller, ControllerCtx, ControllerRegistry, ControllerStep, MachineState, RuntimeError,
};

use super::{
    build_summary_task, rank_diverse, score_all, segment_sentences, select_budget, SummarySpec,
};

const SUMMARY_TASK_ID: &str = "summary";

pub struct SummarizerController {
    spec: SummarySpec,
}

impl SummarizerController {
    pub fn new(spec: SummarySpec) -> Self {
        Self { spec }
    }

    pub fn register(registry: &mut ControllerRegistry) {
        registry.register("summarizer", |params| {
            let topic = params
                .get("topic")
                .and_then(Value::as_str)
                .ok_or_else(|| {
                    RuntimeError::Definition(
                        "summarizer controller requires a `topic` param".into(),
                    )
                })?;
            let budget = params
                .get("budget_words")
                .and_then(Value::as_u64)
                .unwrap_or(50) as usize;
            let spec = SummarySpec::new(topic, budget)
                .map_err(|e| RuntimeError::Definition(e.to_string()))?;
            let spec = match params.get("lambda").and_then(Value::as_f64) {
                Some(lambda) => spec
                    .with_diversity_weight(lambda)
                    .map_err(|e| RuntimeError::Definition(e.to_string()))?,
                None => spec,
            };
            Ok(Box::new(SummarizerController::new(spec)))
        });
    }
}

impl Controller for SummarizerController {
    fn step(
        &self,
        state: &MachineState,
        ctx: &ControllerCtx<'_>,
    ) -> Result<ControllerStep, RuntimeError> {
        if state.is_failed(SUMMARY_TASK_ID) {
            return Ok(ControllerStep::Fail(
                "summary failed validation after retry".into(),
            ));
        }
        if let Some(outcome) = state.validation(SUMMARY_TASK_ID) {
            if outcome.satisfies_dependency() {
                // The pruned summary: only validated spans flow onward.
                return Ok(ControllerStep::Finish(outcome.extracted_spans.join(" ")));
            }
            return Ok(ControllerStep::Continue(vec![]));
        }
        if state.task(SUMMARY_TASK_ID).is_some() {
            return Ok(ControllerStep::Continue(vec![]));
        }

        let doc = ctx.truth.documents().first().ok_or_else(|| {
            RuntimeError::Definition("summarizer machine needs one input document".into())
        })?;
        let sentences = score_all(segment_sentences(doc), &self.spec.topic);
        if sentences.is_empty() {
            return Ok(ControllerStep::Fail("article has no sentences".into()));
        }
        let ranked = rank_diverse(&sentences, &self.spec)
            .map_err(|e| RuntimeError::Definition(e.to_string()))?;
        let selected = select_budget(&ranked, &self.spec);
        let task = build_summary_task(&selected, doc, &self.spec)
            .map_err(|e| RuntimeError::Definition(e.to_string()))?;
        Ok(ControllerStep::Continue(vec![task]))
    }
}
