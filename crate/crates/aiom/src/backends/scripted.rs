//! Deterministic fixture oracle: an ordered rule list matched against the
//! rendered prompt, first match wins.

use regex::Regex;

use crate::core::{Answer, Prompt};

use super::{BackendError, OracleBackend, QueryCtx};

/// How a rule matches the rendered prompt: a literal substring anywhere, or
/// a regular expression anchored at the start of the prompt.
#[derive(Debug, Clone)]
pub enum RuleMatcher {
    Substring(String),
    Pattern(String),
}

#[derive(Debug, Clone)]
pub struct ScriptedRule {
    pub matcher: RuleMatcher,
    pub response: String,
}

impl ScriptedRule {
    pub fn substring(needle: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            matcher: RuleMatcher::Substring(needle.into()),
            response: response.into(),
        }
    }

    pub fn pattern(pattern: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            matcher: RuleMatcher::Pattern(pattern.into()),
            response: response.into(),
        }
    }
}

#[derive(Debug)]
enum CompiledMatcher {
    Substring(String),
    Pattern(Regex),
}

#[derive(Debug)]
pub struct ScriptedBackend {
    id: String,
    rules: Vec<(CompiledMatcher, String)>,
}

impl ScriptedBackend {
    pub fn new(id: impl Into<String>, rules: Vec<ScriptedRule>) -> Result<Self, BackendError> {
        if rules.is_empty() {
            return Err(BackendError::Config(
                "scripted backend requires at least one rule".into(),
            ));
        }
        let mut compiled = Vec::with_capacity(rules.len());
        for rule in rules {
            let matcher = match rule.matcher {
                RuleMatcher::Substring(s) => CompiledMatcher::Substring(s),
                RuleMatcher::Pattern(p) => {
                    let regex = Regex::new(&format!(r"\A(?s:{p})")).map_err(|e| {
                        BackendError::Config(format!("invalid scripted pattern `{p}`: {e}"))
                    })?;
                    CompiledMatcher::Pattern(regex)
                }
            };
            compiled.push((matcher, rule.response));
        }
        Ok(Self {
            id: id.into(),
            rules: compiled,
        })
    }

    /// A single catch-all rule mapping any prompt to `response`.
    pub fn constant(id: impl Into<String>, response: impl Into<String>) -> Self {
        Self::new(id, vec![ScriptedRule::substring("", response)])
            .expect("constant rule is always valid")
    }
}

impl OracleBackend for ScriptedBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn query(&self, prompt: &Prompt, ctx: &QueryCtx<'_>) -> Result<Answer, BackendError> {
        for (matcher, response) in &self.rules {
            let hit = match matcher {
                CompiledMatcher::Substring(needle) => prompt.rendered_text.contains(needle),
                CompiledMatcher::Pattern(regex) => regex.is_match(&prompt.rendered_text),
            };
            if hit {
                return Ok(Answer::new(ctx.task_id, response.clone(), self.id.clone()));
            }
        }
        Err(BackendError::FixtureGap {
            prompt_head: prompt.rendered_text.chars().take(80).collect(),
        })
    }
}
