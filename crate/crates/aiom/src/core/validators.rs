//! Answer validation: a registry of validators keyed by string id, so that
//! a query-task's validation method (attribute 6) is a first-class datum.
//!
//! Core built-ins: `always-accept`, `contains-terms`, `numeric-range`.
//! The summarization and readability machines register their own
//! validators on top of these.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;

use crate::text;

use super::types::{Answer, GroundTruth, PriorExtract, ValidationMethod, ValidationOutcome};
use super::CoreError;

/// What a validator may consult besides the answer itself.
pub struct ValidationContext<'a> {
    pub truth: &'a GroundTruth,
    pub prior_extracts: &'a [PriorExtract],
}

impl<'a> ValidationContext<'a> {
    pub fn new(truth: &'a GroundTruth, prior_extracts: &'a [PriorExtract]) -> Self {
        Self {
            truth,
            prior_extracts,
        }
    }
}

pub trait Validator: Send + Sync {
    fn id(&self) -> &'static str;

    fn validate(
        &self,
        answer: &Answer,
        params: &BTreeMap<String, Value>,
        ctx: &ValidationContext<'_>,
    ) -> Result<ValidationOutcome, CoreError>;
}

/// Registry of validators keyed by id. Machines reference validators by id
/// in their query-tasks; dispatching an unregistered id is a configuration
/// error.
#[derive(Clone, Default)]
pub struct ValidatorRegistry {
    validators: BTreeMap<String, Arc<dyn Validator>>,
}

impl ValidatorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the core built-ins.
    pub fn core_builtins() -> Self {
        let mut registry = Self::new();
        registry.register(Arc::new(AlwaysAccept));
        registry.register(Arc::new(ContainsTerms));
        registry.register(Arc::new(NumericRange));
        registry
    }

    pub fn register(&mut self, validator: Arc<dyn Validator>) {
        self.validators
            .insert(validator.id().to_string(), validator);
    }

    pub fn contains(&self, id: &str) -> bool {
        self.validators.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.validators.keys().map(String::as_str)
    }

    /// Apply the validator named by `method`. Deterministic given inputs.
    pub fn validate(
        &self,
        answer: &Answer,
        method: &ValidationMethod,
        ctx: &ValidationContext<'_>,
    ) -> Result<ValidationOutcome, CoreError> {
        let validator =
            self.validators
                .get(&method.validator)
                .ok_or_else(|| CoreError::UnknownValidator {
                    id: method.validator.clone(),
                })?;
        let outcome = validator.validate(answer, &method.params, ctx)?;
        outcome.check_invariants()?;
        Ok(outcome)
    }
}

/// Accepts any answer; the whole answer text is the single extracted span.
pub struct AlwaysAccept;

impl Validator for AlwaysAccept {
    fn id(&self) -> &'static str {
        "always-accept"
    }

    fn validate(
        &self,
        answer: &Answer,
        _params: &BTreeMap<String, Value>,
        _ctx: &ValidationContext<'_>,
    ) -> Result<ValidationOutcome, CoreError> {
        ValidationOutcome::valid(vec![answer.text.clone()])
    }
}

/// Checks that required terms occur in the answer. Valid when every term
/// occurs, partial when only some do, invalid when none do. Extracted
/// spans are the answer sentences containing at least one term.
pub struct ContainsTerms;

fn sentence_contains_term(sentence: &str, term_lower: &str) -> bool {
    if term_lower.split_whitespace().count() > 1 {
        return sentence.to_lowercase().contains(term_lower);
    }
    text::tokenize(sentence).iter().any(|t| t == term_lower)
}

impl Validator for ContainsTerms {
    fn id(&self) -> &'static str {
        "contains-terms"
    }

    fn validate(
        &self,
        answer: &Answer,
        params: &BTreeMap<String, Value>,
        _ctx: &ValidationContext<'_>,
    ) -> Result<ValidationOutcome, CoreError> {
        let terms = string_list_param(params, "terms", self.id())?;
        if terms.is_empty() {
            return ValidationOutcome::valid(vec![answer.text.clone()]);
        }
        let terms_lower: Vec<String> = terms.iter().map(|t| t.to_lowercase()).collect();
        let sentences = text::split_sentences(&answer.text);

        let mut spans = Vec::new();
        for sentence in &sentences {
            if terms_lower
                .iter()
                .any(|t| sentence_contains_term(sentence, t))
            {
                spans.push(sentence.clone());
            }
        }
        let missing: Vec<&String> = terms
            .iter()
            .zip(&terms_lower)
            .filter(|(_, lower)| {
                !sentences
                    .iter()
                    .any(|s| sentence_contains_term(s, lower))
            })
            .map(|(orig, _)| orig)
            .collect();

        if missing.is_empty() {
            ValidationOutcome::valid(spans)
        } else if spans.is_empty() {
            Ok(ValidationOutcome::invalid(vec![format!(
                "answer contains none of the required terms: {}",
                terms.join(", ")
            )]))
        } else {
            let diags = missing
                .into_iter()
                .map(|t| format!("missing required term: {t}"))
                .collect();
            Ok(ValidationOutcome::partial(spans, diags))
        }
    }
}

/// Parses the first numeric token of the answer and checks it against an
/// inclusive [min, max] range.
pub struct NumericRange;

/// First numeric literal in the text, as (literal, value).
pub fn first_number(text: &str) -> Option<(String, f64)> {
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let signed_start = (c == '-' || c == '+')
            && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || signed_start {
            let start = i;
            if signed_start {
                i += 1;
            }
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len()
                && bytes[i] == '.'
                && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit())
            {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let literal: String = bytes[start..i].iter().collect();
            let value = literal.parse::<f64>().ok()?;
            return Some((literal, value));
        }
        i += 1;
    }
    None
}

impl Validator for NumericRange {
    fn id(&self) -> &'static str {
        "numeric-range"
    }

    fn validate(
        &self,
        answer: &Answer,
        params: &BTreeMap<String, Value>,
        _ctx: &ValidationContext<'_>,
    ) -> Result<ValidationOutcome, CoreError> {
        let min = number_param(params, "min", self.id())?;
        let max = number_param(params, "max", self.id())?;
        match first_number(&answer.text) {
            Some((literal, value)) if value >= min && value <= max => {
                ValidationOutcome::valid(vec![literal])
            }
            Some((_, value)) => Ok(ValidationOutcome::invalid(vec![format!(
                "value {value} outside [{min}, {max}]"
            )])),
            None => Ok(ValidationOutcome::invalid(vec![
                "no numeric value found in answer".to_string(),
            ])),
        }
    }
}

pub(crate) fn string_list_param(
    params: &BTreeMap<String, Value>,
    key: &str,
    validator: &str,
) -> Result<Vec<String>, CoreError> {
    match params.get(key) {
        None => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str().map(str::to_string).ok_or_else(|| {
                    CoreError::InvalidParams {
                        validator: validator.to_string(),
                        detail: format!("`{key}` entries must be strings"),
                    }
                })
            })
            .collect(),
        Some(_) => Err(CoreError::InvalidParams {
            validator: validator.to_string(),
            detail: format!("`{key}` must be an array of strings"),
        }),
    }
}

pub(crate) fn number_param(
    params: &BTreeMap<String, Value>,
    key: &str,
    validator: &str,
) -> Result<f64, CoreError> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| CoreError::InvalidParams {
            validator: validator.to_string(),
            detail: format!("missing numeric param `{key}`"),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::types::ValidationStatus;
    use serde_json::json;

    fn answer(text: &str) -> Answer {
        Answer::new("task", text, "test-oracle")
    }

    fn ctx_truth() -> GroundTruth {
        GroundTruth::empty()
    }

    #[test]
    fn always_accept_takes_whole_answer_as_span() {
        let truth = ctx_truth();
        let ctx = ValidationContext::new(&truth, &[]);
        let registry = ValidatorRegistry::core_builtins();
        let out = registry
            .validate(
                &answer("anything at all"),
                &ValidationMethod::new("always-accept"),
                &ctx,
            )
            .unwrap();
        assert_eq!(out.status, ValidationStatus::Valid);
        assert_eq!(out.extracted_spans, vec!["anything at all"]);
    }

    #[test]
    fn unregistered_validator_is_a_configuration_error() {
        let truth = ctx_truth();
        let ctx = ValidationContext::new(&truth, &[]);
        let registry = ValidatorRegistry::core_builtins();
        let err = registry
            .validate(&answer("x"), &ValidationMethod::new("no-such"), &ctx)
            .unwrap_err();
        assert!(matches!(err, CoreError::UnknownValidator { .. }));
    }

    #[test]
    fn contains_terms_partial_extracts_matching_sentences() {
        // Brute-force oracle: enumerate the sentences by hand. The answer
        // has two sentences; only the first contains "solar"; "wind" is
        // absent entirely, so the verdict is partial with one span.
        let truth = ctx_truth();
        let ctx = ValidationContext::new(&truth, &[]);
        let registry = ValidatorRegistry::core_builtins();
        let method = ValidationMethod::new("contains-terms")
            .with_param("terms", json!(["solar", "wind"]));
        let out = registry
            .validate(
                &answer("Solar output doubled. Nothing else changed."),
                &method,
                &ctx,
            )
            .unwrap();
        assert_eq!(out.status, ValidationStatus::Partial);
        assert_eq!(out.extracted_spans, vec!["Solar output doubled."]);
        assert_eq!(out.diagnostics, vec!["missing required term: wind"]);
    }

    #[test]
    fn contains_terms_invalid_when_no_term_present() {
        let truth = ctx_truth();
        let ctx = ValidationContext::new(&truth, &[]);
        let registry = ValidatorRegistry::core_builtins();
        let method =
            ValidationMethod::new("contains-terms").with_param("terms", json!(["solar", "wind"]));
        let out = registry
            .validate(&answer("Nothing relevant here."), &method, &ctx)
            .unwrap();
        assert_eq!(out.status, ValidationStatus::Invalid);
        assert!(out.extracted_spans.is_empty());
    }

    #[test]
    fn contains_terms_valid_when_all_present() {
        let truth = ctx_truth();
        let ctx = ValidationContext::new(&truth, &[]);
        let registry = ValidatorRegistry::core_builtins();
        let method =
            ValidationMethod::new("contains-terms").with_param("terms", json!(["solar", "wind"]));
        let out = registry
            .validate(&answer("Solar rose. Wind fell."), &method, &ctx)
            .unwrap();
        assert_eq!(out.status, ValidationStatus::Valid);
        assert_eq!(out.extracted_spans.len(), 2);
    }

    #[test]
    fn numeric_range_accepts_first_number_in_range() {
        let truth = ctx_truth();
        let ctx = ValidationContext::new(&truth, &[]);
        let registry = ValidatorRegistry::core_builtins();
        let method = ValidationMethod::new("numeric-range")
            .with_param("min", json!(3.0))
            .with_param("max", json!(12.0));
        let out = registry
            .validate(&answer("grade 7 roughly"), &method, &ctx)
            .unwrap();
        assert_eq!(out.status, ValidationStatus::Valid);
        assert_eq!(out.extracted_spans, vec!["7"]);

        let out = registry
            .validate(&answer("about 14 or so"), &method, &ctx)
            .unwrap();
        assert_eq!(out.status, ValidationStatus::Invalid);

        let out = registry.validate(&answer("no idea"), &method, &ctx).unwrap();
        assert_eq!(out.status, ValidationStatus::Invalid);
    }

    #[test]
    fn first_number_parses_signed_and_decimal_literals() {
        assert_eq!(
            first_number("score -0.8 overall"),
            Some(("-0.8".to_string(), -0.8))
        );
        assert_eq!(first_number("take 2.5 then 7"), Some(("2.5".to_string(), 2.5)));
        assert_eq!(first_number("none"), None);
    }
}
