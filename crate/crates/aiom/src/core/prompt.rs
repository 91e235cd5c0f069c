//! Prompt rendering: a fixed section template over the task description and
//! the non-empty attributes, in a fixed order, so that validators and tests
//! can locate sections mechanically.

use super::types::{GroundTruth, Prompt, QueryTask};
use super::CoreError;

pub const TEMPLATE_ID: &str = "sections-v1";

/// Render a query-task into a prompt. Pure: identical inputs produce
/// byte-identical output. Sections appear in fixed order — description,
/// context, prior results, requirements, examples, constraints — and empty
/// attribute sections are omitted.
pub fn render_prompt(task: &QueryTask, truth: &GroundTruth) -> Result<Prompt, CoreError> {
    for excerpt in &task.context_excerpts {
        if truth.get(&excerpt.document_id).is_none() {
            return Err(CoreError::UnknownDocument {
                id: excerpt.document_id.clone(),
            });
        }
    }

    let mut sections: Vec<String> = Vec::new();
    sections.push(format!("### DESCRIPTION\n{}", task.description));

    if !task.context_excerpts.is_empty() {
        let body = task
            .context_excerpts
            .iter()
            .map(|e| format!("[{}] {}", e.document_id, e.text))
            .collect::<Vec<_>>()
            .join("\n");
        sections.push(format!("### CONTEXT\n{body}"));
    }
    if !task.prior_extracts.is_empty() {
        let body = task
            .prior_extracts
            .iter()
            .map(|e| format!("[{}] {}", e.source_task_id, e.text))
            .collect::<Vec<_>>()
            .join("\n");
        sections.push(format!("### PRIOR RESULTS\n{body}"));
    }
    if !task.requirements.is_empty() {
        let body = task
            .requirements
            .iter()
            .map(|r| format!("- {r}"))
            .collect::<Vec<_>>()
            .join("\n");
        sections.push(format!("### REQUIREMENTS\n{body}"));
    }
    if !task.examples.is_empty() {
        let body = task
            .examples
            .iter()
            .map(|e| format!("Input: {}\nOutput: {}", e.input, e.output))
            .collect::<Vec<_>>()
            .join("\n");
        sections.push(format!("### EXAMPLES\n{body}"));
    }
    if !task.constraints.is_empty() {
        let body = task
            .constraints
            .iter()
            .map(|c| format!("- {c}"))
            .collect::<Vec<_>>()
            .join("\n");
        sections.push(format!("### CONSTRAINTS\n{body}"));
    }

    Ok(Prompt {
        rendered_text: sections.join("\n\n"),
        template_id: TEMPLATE_ID.to_string(),
        role: task.oracle_role.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::types::{ContextExcerpt, Document, ValidationMethod};

    fn bare_task(description: &str) -> QueryTask {
        QueryTask::new(
            "t",
            description,
            ValidationMethod::new("always-accept"),
            "default",
        )
    }

    #[test]
    fn empty_attributes_render_only_the_description() {
        let prompt = render_prompt(&bare_task("Summarize."), &GroundTruth::empty()).unwrap();
        assert_eq!(prompt.rendered_text, "### DESCRIPTION\nSummarize.");
        assert_eq!(prompt.template_id, TEMPLATE_ID);
        assert_eq!(prompt.role, "default");
    }

    #[test]
    fn sections_appear_in_fixed_order_and_absent_when_empty() {
        let mut task = bare_task("Do the thing.");
        task.requirements = vec!["first requirement".into(), "second requirement".into()];
        task.constraints = vec!["one constraint".into()];
        let prompt = render_prompt(&task, &GroundTruth::empty()).unwrap();
        assert_eq!(
            prompt.rendered_text,
            "### DESCRIPTION\nDo the thing.\n\n\
             ### REQUIREMENTS\n- first requirement\n- second requirement\n\n\
             ### CONSTRAINTS\n- one constraint"
        );
        assert!(!prompt.rendered_text.contains("### CONTEXT"));
        assert!(!prompt.rendered_text.contains("### EXAMPLES"));
        assert!(!prompt.rendered_text.contains("### PRIOR RESULTS"));
    }

    #[test]
    fn rendering_is_pure() {
        let mut task = bare_task("Compare.");
        task.requirements.push("answer tersely".into());
        let truth = GroundTruth::empty();
        let a = render_prompt(&task, &truth).unwrap();
        let b = render_prompt(&task, &truth).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_context_document_is_an_error() {
        let truth = GroundTruth::new(vec![Document::new("known", "K", "body")]).unwrap();
        let mut task = bare_task("Use context.");
        task.context_excerpts.push(ContextExcerpt {
            document_id: "missing".into(),
            text: "whatever".into(),
        });
        let err = render_prompt(&task, &truth).unwrap_err();
        assert!(matches!(err, CoreError::UnknownDocument { .. }));
    }
}
