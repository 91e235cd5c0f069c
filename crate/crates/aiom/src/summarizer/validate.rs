//! Coverage-and-redundancy validation of a generated summary: prune
//! redundant and off-topic sentences, then require the surviving text to
//! cover enough of the key-term clusters extracted from the selected
//! context.

use std::collections::BTreeMap;

use serde_json::Value;

use crate::core::validators::{string_list_param, ValidationContext, Validator};
use crate::core::{Answer, CoreError, ValidationOutcome};
use crate::text;

pub const VALIDATOR_ID: &str = "coverage-and-redundancy";
/// A summary sentence is redundant when its TF cosine to an earlier answer
/// sentence exceeds this.
pub const REDUNDANCY_THRESHOLD: f64 = 0.8;
/// Valid summaries cover at least this fraction of key-term clusters.
pub const COVERAGE_THRESHOLD: f64 = 0.8;

/// Prune the answer, then judge coverage. Surviving sentences become the
/// extracted spans; they are the controlled summary.
pub fn validate_summary(
    answer: &Answer,
    params: &BTreeMap<String, Value>,
) -> Result<ValidationOutcome, CoreError> {
    let topic = params
        .get("topic")
        .and_then(Value::as_str)
        .map(str::to_string)
        .unwrap_or_else(|| {
            string_list_param(params, "topic_terms", VALIDATOR_ID)
                .map(|terms| terms.join(" "))
                .unwrap_or_default()
        });
    let clusters = cluster_param(params)?;

    let sentences = text::split_sentences(&answer.text);
    let frequencies: Vec<_> = sentences.iter().map(|s| text::term_frequencies(s)).collect();

    let mut surviving: Vec<String> = Vec::new();
    let mut diagnostics: Vec<String> = Vec::new();
    for (i, sentence) in sentences.iter().enumerate() {
        let redundant = (0..i).any(|j| {
            text::cosine_of_frequencies(&frequencies[i], &frequencies[j]) > REDUNDANCY_THRESHOLD
        });
        if redundant {
            diagnostics.push(format!("pruned redundant sentence: {sentence}"));
            continue;
        }
        if text::tf_cosine(sentence, &topic) == 0.0 {
            diagnostics.push(format!("pruned irrelevant sentence: {sentence}"));
            continue;
        }
        surviving.push(sentence.clone());
    }

    if surviving.is_empty() {
        diagnostics.push("no relevant sentences retained".into());
        return Ok(ValidationOutcome::invalid(diagnostics));
    }

    // A cluster is covered when any surviving sentence carries a content
    // word sharing a stem with one of the cluster's terms.
    let surviving_stems: std::collections::BTreeSet<String> = surviving
        .iter()
        .flat_map(|s| text::content_words(s))
        .map(|w| text::stem(&w))
        .collect();
    let covered = clusters
        .iter()
        .filter(|cluster| {
            cluster
                .iter()
                .any(|term| surviving_stems.contains(&text::stem(term)))
        })
        .count();
    let coverage = if clusters.is_empty() {
        1.0
    } else {
        covered as f64 / clusters.len() as f64
    };

    for cluster in &clusters {
        if !cluster
            .iter()
            .any(|term| surviving_stems.contains(&text::stem(term)))
        {
            diagnostics.push(format!("uncovered aspect: {}", cluster.join("/")));
        }
    }

    if coverage >= COVERAGE_THRESHOLD {
        Ok(ValidationOutcome {
            status: crate::core::ValidationStatus::Valid,
            extracted_spans: surviving,
            diagnostics,
        })
    } else if coverage > 0.0 {
        Ok(ValidationOutcome::partial(surviving, diagnostics))
    } else {
        diagnostics.push("summary covers none of the key-term clusters".into());
        Ok(ValidationOutcome::invalid(diagnostics))
    }
}

fn cluster_param(params: &BTreeMap<String, Value>) -> Result<Vec<Vec<String>>, CoreError> {
    match params.get("key_term_clusters") {
        None => Ok(Vec::new()),
        Some(Value::Array(outer)) => outer
            .iter()
            .map(|inner| match inner {
                Value::Array(terms) => terms
                    .iter()
                    .map(|t| {
                        t.as_str().map(str::to_string).ok_or_else(|| {
                            CoreError::InvalidParams {
                                validator: VALIDATOR_ID.to_string(),
                                detail: "cluster terms must be strings".into(),
                            }
                        })
                    })
                    .collect(),
                _ => Err(CoreError::InvalidParams {
                    validator: VALIDATOR_ID.to_string(),
                    detail: "`key_term_clusters` must be an array of arrays".into(),
                }),
            })
            .collect(),
        Some(_) => Err(CoreError::InvalidParams {
            validator: VALIDATOR_ID.to_string(),
            detail: "`key_term_clusters` must be an array of arrays".into(),
        }),
    }
}

pub struct SummaryValidator;

impl Validator for SummaryValidator {
    fn id(&self) -> &'static str {
        VALIDATOR_ID
    }

    fn validate(
        &self,
        answer: &Answer,
        params: &BTreeMap<String, Value>,
        _ctx: &ValidationContext<'_>,
    ) -> Result<ValidationOutcome, CoreError> {
        validate_summary(answer, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::ValidationStatus;
    use serde_json::json;

    fn params(topic: &str, clusters: Value) -> BTreeMap<String, Value> {
        BTreeMap::from([
            ("topic".to_string(), json!(topic)),
            ("key_term_clusters".to_string(), clusters),
        ])
    }

    fn answer(text: &str) -> Answer {
        Answer::new("summary", text, "oracle")
    }

    #[test]
    fn full_coverage_without_redundancy_is_valid() {
        let p = params(
            "solar energy",
            json!([["solar"], ["panel", "panels"], ["storage"]]),
        );
        let out = validate_summary(
            &answer("Solar panels convert light. Storage keeps solar power at night."),
            &p,
        )
        .unwrap();
        assert_eq!(out.status, ValidationStatus::Valid);
        assert_eq!(out.extracted_spans.len(), 2);
    }

    #[test]
    fn duplicated_sentence_is_pruned_from_spans() {
        let p = params("solar energy", json!([["solar"]]));
        let out = validate_summary(
            &answer("Solar output doubled this year. Solar output doubled this year."),
            &p,
        )
        .unwrap();
        assert_eq!(out.extracted_spans, vec!["Solar output doubled this year."]);
        assert!(out
            .diagnostics
            .iter()
            .any(|d| d.starts_with("pruned redundant")));
    }

    #[test]
    fn off_topic_sentence_is_pruned() {
        let p = params("solar energy", json!([["solar"]]));
        let out = validate_summary(
            &answer("Solar adoption keeps rising. Otters swim in rivers."),
            &p,
        )
        .unwrap();
        assert_eq!(out.extracted_spans, vec!["Solar adoption keeps rising."]);
    }

    #[test]
    fn covering_one_of_three_clusters_is_partial() {
        // Coverage 1/3 < 0.8 and > 0, so the verdict is partial.
        let p = params(
            "solar energy",
            json!([["solar"], ["wind"], ["hydro"]]),
        );
        let out = validate_summary(&answer("Solar energy leads the market."), &p).unwrap();
        assert_eq!(out.status, ValidationStatus::Partial);
        assert_eq!(out.extracted_spans.len(), 1);
    }

    #[test]
    fn zero_coverage_is_invalid_with_empty_spans() {
        let p = params("solar energy", json!([["wind"], ["hydro"]]));
        let out = validate_summary(&answer("Solar energy leads the market."), &p).unwrap();
        assert_eq!(out.status, ValidationStatus::Invalid);
        assert!(out.extracted_spans.is_empty());
    }

    #[test]
    fn stems_cover_inflected_forms() {
        let p = params("solar panels", json!([["panel"]]));
        let out = validate_summary(&answer("New panels shipped with solar kits."), &p).unwrap();
        assert_eq!(out.status, ValidationStatus::Valid);
    }

    #[test]
    fn empty_answer_is_invalid() {
        let p = params("solar", json!([["solar"]]));
        let out = validate_summary(&answer(""), &p).unwrap();
        assert_eq!(out.status, ValidationStatus::Invalid);
    }
}
