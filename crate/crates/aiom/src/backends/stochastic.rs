//! Seeded stochastic oracle behaviors for simulation. Synthetic articles
//! embed their latent attributes in the body as `difficulty=<f> grade=<g>
//! genre=<name>`; each behavior reads the attributes it models from the
//! rendered prompt and derives all randomness from (run seed, task id), so
//! identical (seed, task id, prompt) always yields an identical response.
//!
//! Behaviors:
//! - `sign-comparator`: deterministic; "same" inside the tie band, else the
//!   sign of the difficulty gap.
//! - `noisy-comparator`: grade-anchored discernment model. The pair's true
//!   relation is the sign of the grade difference; it is reported with
//!   probability w = 2·(p − 1/2) where p = min(cap, floor + slope·|Δd|),
//!   and the comparator answers "same" when it fails to discern. At
//!   p ≡ 1/2 every answer is "same" (no information); at p ≡ 1 the relation
//!   is always reported.
//! - `noisy-grade-assessor`: true grade with probability `accuracy`, else an
//!   offset of ±1 or ±2 (reflected at the grade bounds so an error never
//!   lands back on the true grade).
//! - `noisy-genre-assessor`: true genre with probability `accuracy`, else a
//!   uniformly chosen other synthetic genre.
//! - `fixed-grade`: always answers the configured grade.
//! - `adversarial-comparator`: uniform random responses, including an
//!   unparseable token; used by the termination fuzz.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::core::{Answer, Prompt};

use super::{derive_seed, BackendError, OracleBackend, QueryCtx};

pub const MIN_GRADE: i64 = 3;
pub const MAX_GRADE: i64 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Behavior {
    SignComparator,
    NoisyComparator,
    NoisyGradeAssessor,
    NoisyGenreAssessor,
    FixedGrade,
    AdversarialComparator,
}

impl Behavior {
    fn from_id(id: &str) -> Option<Self> {
        match id {
            "sign-comparator" => Some(Self::SignComparator),
            "noisy-comparator" => Some(Self::NoisyComparator),
            "noisy-grade-assessor" => Some(Self::NoisyGradeAssessor),
            "noisy-genre-assessor" => Some(Self::NoisyGenreAssessor),
            "fixed-grade" => Some(Self::FixedGrade),
            "adversarial-comparator" => Some(Self::AdversarialComparator),
            _ => None,
        }
    }
}

#[derive(Debug)]
pub struct StochasticBackend {
    id: String,
    behavior: Behavior,
    params: BTreeMap<String, f64>,
}

impl StochasticBackend {
    pub fn new(
        behavior_id: &str,
        params: BTreeMap<String, f64>,
    ) -> Result<Self, BackendError> {
        let behavior = Behavior::from_id(behavior_id).ok_or_else(|| {
            BackendError::UnknownBehavior {
                id: behavior_id.to_string(),
            }
        })?;
        Ok(Self {
            id: format!("stochastic:{behavior_id}"),
            behavior,
            params,
        })
    }

    fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn require_param(&self, key: &str) -> Result<f64, BackendError> {
        self.params.get(key).copied().ok_or_else(|| {
            BackendError::Config(format!(
                "behavior `{}` requires numeric param `{key}`",
                self.id
            ))
        })
    }

    fn respond(&self, prompt: &str, rng: &mut ChaCha8Rng) -> Result<String, BackendError> {
        match self.behavior {
            Behavior::SignComparator => {
                let (d_in, d_ref) = difficulty_pair(prompt, &self.id)?;
                let tie_band = self.param("tie_band", 0.25);
                let delta = d_in - d_ref;
                Ok(relation_word(if delta.abs() < tie_band {
                    0
                } else if delta > 0.0 {
                    1
                } else {
                    -1
                })
                .to_string())
            }
            Behavior::NoisyComparator => {
                let (d_in, d_ref) = difficulty_pair(prompt, &self.id)?;
                let (g_in, g_ref) = grade_pair(prompt, &self.id)?;
                let floor = self.param("floor", 0.5);
                let slope = self.param("slope", 0.15);
                let cap = self.param("cap", 0.95);
                let p = (floor + slope * (d_in - d_ref).abs()).min(cap);
                let w = (2.0 * (p - 0.5)).clamp(0.0, 1.0);
                let relation = (g_in - g_ref).signum();
                if rng.random::<f64>() < w {
                    Ok(relation_word(relation).to_string())
                } else {
                    Ok("same".to_string())
                }
            }
            Behavior::NoisyGradeAssessor => {
                let grade = first_i64(prompt, "grade=").ok_or_else(|| {
                    BackendError::Config(format!(
                        "behavior `{}` found no grade attribute in prompt",
                        self.id
                    ))
                })?;
                let accuracy = self.param("accuracy", 0.5);
                let p_off1 = self.param("p_off1", 0.7);
                let p_off2 = self.param("p_off2", 0.3);
                if rng.random::<f64>() < accuracy {
                    return Ok(grade.to_string());
                }
                let magnitude = if rng.random::<f64>() < p_off1 / (p_off1 + p_off2) {
                    1
                } else {
                    2
                };
                let sign: i64 = if rng.random::<f64>() < 0.5 { 1 } else { -1 };
                let mut wrong = grade + sign * magnitude;
                if !(MIN_GRADE..=MAX_GRADE).contains(&wrong) {
                    wrong = grade - sign * magnitude;
                }
                Ok(wrong.to_string())
            }
            Behavior::NoisyGenreAssessor => {
                let genre = first_token(prompt, "genre=").ok_or_else(|| {
                    BackendError::Config(format!(
                        "behavior `{}` found no genre attribute in prompt",
                        self.id
                    ))
                })?;
                let accuracy = self.param("accuracy", 1.0);
                let n_genres = self.require_param("n_genres")? as i64;
                if rng.random::<f64>() < accuracy || n_genres < 2 {
                    return Ok(genre);
                }
                // Synthetic genre names look like `genre-07`; errors pick a
                // different one uniformly. Unrecognized names pass through.
                match genre
                    .strip_prefix("genre-")
                    .and_then(|s| s.parse::<i64>().ok())
                {
                    Some(true_idx) => {
                        let pick = rng.random_range(0..n_genres - 1);
                        let wrong = if pick >= true_idx { pick + 1 } else { pick };
                        Ok(format!("genre-{wrong:02}"))
                    }
                    None => Ok(genre),
                }
            }
            Behavior::FixedGrade => {
                let grade = self.require_param("grade")?;
                Ok(format!("{}", grade as i64))
            }
            Behavior::AdversarialComparator => {
                let p_garbage = self.param("p_garbage", 0.25);
                if rng.random::<f64>() < p_garbage {
                    Ok("unintelligible".to_string())
                } else {
                    Ok(relation_word(rng.random_range(-1..=1)).to_string())
                }
            }
        }
    }
}

impl OracleBackend for StochasticBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn query(&self, prompt: &Prompt, ctx: &QueryCtx<'_>) -> Result<Answer, BackendError> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ctx.run_seed, ctx.task_id));
        let text = self.respond(&prompt.rendered_text, &mut rng)?;
        Ok(Answer::new(ctx.task_id, text, self.id.clone()))
    }
}

fn relation_word(relation: i64) -> &'static str {
    match relation.signum() {
        1 => "harder",
        -1 => "easier",
        _ => "same",
    }
}

/// All `key<float>` occurrences, in order of appearance.
fn all_f64(text: &str, key: &str) -> Vec<f64> {
    let mut values = Vec::new();
    let mut rest = text;
    while let Some(pos) = rest.find(key) {
        let tail = &rest[pos + key.len()..];
        let end = tail
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_digit() || *c == '.' || *c == '-' || *c == '+'))
            .map_or(tail.len(), |(i, _)| i);
        if let Ok(v) = tail[..end].parse::<f64>() {
            values.push(v);
        }
        rest = &rest[pos + key.len()..];
    }
    values
}

fn first_i64(text: &str, key: &str) -> Option<i64> {
    all_f64(text, key).first().map(|v| *v as i64)
}

fn first_token(text: &str, key: &str) -> Option<String> {
    let pos = text.find(key)?;
    let tail = &text[pos + key.len()..];
    let token: String = tail.chars().take_while(|c| !c.is_whitespace()).collect();
    (!token.is_empty()).then_some(token)
}

/// The first difficulty value is the input article, the second the
/// reference, matching the context order of comparison tasks.
fn difficulty_pair(prompt: &str, id: &str) -> Result<(f64, f64), BackendError> {
    let values = all_f64(prompt, "difficulty=");
    if values.len() < 2 {
        return Err(BackendError::Config(format!(
            "behavior `{id}` requires two difficulty attributes in the prompt, found {}",
            values.len()
        )));
    }
    Ok((values[0], values[1]))
}

fn grade_pair(prompt: &str, id: &str) -> Result<(i64, i64), BackendError> {
    let values = all_f64(prompt, "grade=");
    if values.len() < 2 {
        return Err(BackendError::Config(format!(
            "behavior `{id}` requires two grade attributes in the prompt, found {}",
            values.len()
        )));
    }
    Ok((values[0] as i64, values[1] as i64))
}


#[cfg(test)]
mod order_tests {
    use super::*;
    use crate::backends::OracleBackend;
    use std::collections::BTreeMap as Map;
    use std::time::Duration;

    #[test]
    fn responses_are_independent_of_call_order() {
        let backend = StochasticBackend::new(
            "noisy-grade-assessor",
            Map::from([("accuracy".to_string(), 0.5)]),
        )
        .unwrap();
        let prompt = |g: i64| crate::core::Prompt {
            rendered_text: format!("[a] difficulty={g}.0 grade={g} genre=g"),
            template_id: "sections-v1".into(),
            role: "r".into(),
        };
        let ask = |task: &str, g: i64| {
            backend
                .query(&prompt(g), &QueryCtx::new(3, task, Duration::from_secs(1)))
                .unwrap()
                .text
        };
        let forward: Vec<String> = (0..20).map(|i| ask(&format!("t{i}"), 3 + i % 10)).collect();
        let backward: Vec<String> = (0..20)
            .rev()
            .map(|i| ask(&format!("t{i}"), 3 + i % 10))
            .collect();
        let backward_reversed: Vec<String> = backward.into_iter().rev().collect();
        assert_eq!(forward, backward_reversed);
    }
}
