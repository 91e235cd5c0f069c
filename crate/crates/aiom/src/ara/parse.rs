//! Answer parsing rules for the readability machine, fixed so scripted
//! fixtures stay portable:
//! - genre: case-insensitive exact match against the configured names;
//! - grade: first integer token, where spelled-out cardinals and ordinals
//!   (one/first through twelve/twelfth) count as integer tokens; parsed
//!   grades clamp to [3, 12];
//! - comparison: the tokens easier/same/harder, or a signed number clamped
//!   to [-1, 1].
//!
//! Each rule also exists as a registered validator so the runtime's repair
//! policy can retry unparseable answers with a corrective constraint.

use std::collections::BTreeMap;

use serde_json::Value;

use crate::core::validators::{string_list_param, ValidationContext, Validator};
use crate::core::{Answer, CoreError, ValidationOutcome};
use crate::text;

use super::types::{MAX_GRADE, MIN_GRADE};

/// Case-insensitive exact match after trimming; returns the configured
/// (canonical) spelling.
pub fn parse_genre(answer: &str, genres: &[String]) -> Option<String> {
    let needle = answer.trim().to_lowercase();
    genres
        .iter()
        .find(|g| g.to_lowercase() == needle)
        .cloned()
}

const NUMBER_WORDS: [(&str, i64); 24] = [
    ("one", 1),
    ("first", 1),
    ("two", 2),
    ("second", 2),
    ("three", 3),
    ("third", 3),
    ("four", 4),
    ("fourth", 4),
    ("five", 5),
    ("fifth", 5),
    ("six", 6),
    ("sixth", 6),
    ("seven", 7),
    ("seventh", 7),
    ("eight", 8),
    ("eighth", 8),
    ("nine", 9),
    ("ninth", 9),
    ("ten", 10),
    ("tenth", 10),
    ("eleven", 11),
    ("eleventh", 11),
    ("twelve", 12),
    ("twelfth", 12),
];

/// First integer token in the answer: a digit run (optionally signed) or a
/// spelled-out cardinal/ordinal up to twelve.
pub fn first_integer_token(answer: &str) -> Option<i64> {
    for raw in answer.split_whitespace() {
        let token = raw.trim_matches(|c: char| !c.is_alphanumeric() && c != '-');
        if token.is_empty() {
            continue;
        }
        let unsigned = token.strip_prefix('-').unwrap_or(token);
        if !unsigned.is_empty() && unsigned.chars().all(|c| c.is_ascii_digit()) {
            if let Ok(v) = token.parse::<i64>() {
                return Some(v);
            }
        }
        let lower = token.to_lowercase();
        if let Some((_, v)) = NUMBER_WORDS.iter().find(|(w, _)| *w == lower) {
            return Some(*v);
        }
    }
    None
}

/// First integer token clamped to the grade span.
pub fn parse_grade(answer: &str) -> Option<u8> {
    first_integer_token(answer).map(|v| v.clamp(MIN_GRADE as i64, MAX_GRADE as i64) as u8)
}

/// Comparison answers map to a score in [-1, 1]: harder → +1, easier → −1,
/// same → 0; a bare signed number is clamped, preserving graded
/// confidence.
pub fn parse_comparison(answer: &str) -> Option<f64> {
    for token in text::tokenize(answer) {
        match token.as_str() {
            "harder" => return Some(1.0),
            "easier" => return Some(-1.0),
            "same" => return Some(0.0),
            _ => {}
        }
    }
    crate::core::validators::first_number(answer).map(|(_, v)| v.clamp(-1.0, 1.0))
}

/// Renders a score the way transcripts carry it: integers stay integral.
pub fn score_span(value: f64) -> String {
    if value.fract() == 0.0 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

pub const GENRE_VALIDATOR_ID: &str = "genre-name";
pub const GRADE_VALIDATOR_ID: &str = "grade-parse";
pub const COMPARISON_VALIDATOR_ID: &str = "comparison-parse";

/// Diagnostic doubling as the retry constraint for unparseable genres.
pub fn genre_retry_constraint(genres: &[String]) -> String {
    format!(
        "answer with exactly one genre name from: {}",
        genres.join(", ")
    )
}

pub const GRADE_RETRY_CONSTRAINT: &str =
    "answer with a single integer grade level between 3 and 12";
pub const COMPARISON_RETRY_CONSTRAINT: &str =
    "answer with exactly one of: easier, same, harder";

pub struct GenreNameValidator;

impl Validator for GenreNameValidator {
    fn id(&self) -> &'static str {
        GENRE_VALIDATOR_ID
    }

    fn validate(
        &self,
        answer: &Answer,
        params: &BTreeMap<String, Value>,
        _ctx: &ValidationContext<'_>,
    ) -> Result<ValidationOutcome, CoreError> {
        let genres = string_list_param(params, "genres", self.id())?;
        match parse_genre(&answer.text, &genres) {
            Some(genre) => ValidationOutcome::valid(vec![genre]),
            None => Ok(ValidationOutcome::invalid(vec![genre_retry_constraint(
                &genres,
            )])),
        }
    }
}

pub struct GradeParseValidator;

impl Validator for GradeParseValidator {
    fn id(&self) -> &'static str {
        GRADE_VALIDATOR_ID
    }

    fn validate(
        &self,
        answer: &Answer,
        _params: &BTreeMap<String, Value>,
        _ctx: &ValidationContext<'_>,
    ) -> Result<ValidationOutcome, CoreError> {
        match parse_grade(&answer.text) {
            Some(grade) => ValidationOutcome::valid(vec![grade.to_string()]),
            None => Ok(ValidationOutcome::invalid(vec![
                GRADE_RETRY_CONSTRAINT.to_string(),
            ])),
        }
    }
}

pub struct ComparisonParseValidator;

impl Validator for ComparisonParseValidator {
    fn id(&self) -> &'static str {
        COMPARISON_VALIDATOR_ID
    }

    fn validate(
        &self,
        answer: &Answer,
        _params: &BTreeMap<String, Value>,
        _ctx: &ValidationContext<'_>,
    ) -> Result<ValidationOutcome, CoreError> {
        match parse_comparison(&answer.text) {
            Some(score) => ValidationOutcome::valid(vec![score_span(score)]),
            None => Ok(ValidationOutcome::invalid(vec![
                COMPARISON_RETRY_CONSTRAINT.to_string(),
            ])),
        }
    }
}
