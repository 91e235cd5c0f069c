//! The replayable event log of one machine run. Events carry a dense
//! sequence number and serialize to JSON Lines, one event per line, so a
//! run can be diffed, replayed, and verified byte-for-byte.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::core::QueryTask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    TaskCreated,
    PromptRendered,
    AnswerReceived,
    Validated,
    Halted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEvent {
    pub seq: u64,
    pub kind: EventKind,
    pub task_id: Option<String>,
    pub payload: Value,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub events: Vec<TranscriptEvent>,
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("sequence gap at event {at}: expected seq {expected}, found {found}")]
    SeqGap { at: usize, expected: u64, found: u64 },
    #[error("lifecycle violation at seq {seq}: {detail}")]
    Lifecycle { seq: u64, detail: String },
    #[error("dependency-order violation at seq {seq}: {detail}")]
    DagOrder { seq: u64, detail: String },
}

impl Transcript {
    pub fn push(&mut self, kind: EventKind, task_id: Option<&str>, payload: Value) {
        let seq = self.events.len() as u64;
        self.events.push(TranscriptEvent {
            seq,
            kind,
            task_id: task_id.map(str::to_string),
            payload,
        });
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// One JSON object per line, trailing newline after the last event.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("transcript events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(input: &str) -> Result<Self, TranscriptError> {
        let mut events = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let event: TranscriptEvent =
                serde_json::from_str(line).map_err(|e| TranscriptError::Parse {
                    line: idx + 1,
                    detail: e.to_string(),
                })?;
            events.push(event);
        }
        Ok(Self { events })
    }

    /// Check the structural invariants: dense sequence numbers from 0, a
    /// single halted event only at the end, and per-task lifecycle order —
    /// one task-created first, then one or more
    /// prompt-rendered → answer-received → validated rounds.
    pub fn verify_invariants(&self) -> Result<(), TranscriptError> {
        use std::collections::BTreeMap;

        for (idx, event) in self.events.iter().enumerate() {
            if event.seq != idx as u64 {
                return Err(TranscriptError::SeqGap {
                    at: idx,
                    expected: idx as u64,
                    found: event.seq,
                });
            }
            if event.kind == EventKind::Halted && idx + 1 != self.events.len() {
                return Err(TranscriptError::Lifecycle {
                    seq: event.seq,
                    detail: "halted event is not the final event".into(),
                });
            }
        }

        // Per-task expected next kinds.
        #[derive(PartialEq)]
        enum Phase {
            Prompt,
            Answer,
            Validation,
        }
        let mut phases: BTreeMap<&str, Phase> = BTreeMap::new();
        for event in &self.events {
            let Some(task_id) = event.task_id.as_deref() else {
                continue;
            };
            let phase = phases.get(task_id);
            match (event.kind, phase) {
                (EventKind::TaskCreated, None) => {
                    phases.insert(task_id, Phase::Prompt);
                }
                (EventKind::TaskCreated, Some(_)) => {
                    return Err(TranscriptError::Lifecycle {
                        seq: event.seq,
                        detail: format!("task `{task_id}` created twice"),
                    });
                }
                (EventKind::PromptRendered, Some(Phase::Prompt)) => {
                    phases.insert(task_id, Phase::Answer);
                }
                (EventKind::AnswerReceived, Some(Phase::Answer)) => {
                    phases.insert(task_id, Phase::Validation);
                }
                (EventKind::Validated, Some(Phase::Validation)) => {
                    phases.insert(task_id, Phase::Prompt);
                }
                (kind, _) => {
                    return Err(TranscriptError::Lifecycle {
                        seq: event.seq,
                        detail: format!("unexpected {kind:?} for task `{task_id}`"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Check the dependency-order invariant: no answer-received for a task
    /// precedes the validated event of any of its dependencies.
    pub fn verify_dag_ordering(&self) -> Result<(), TranscriptError> {
        use std::collections::{BTreeMap, BTreeSet};

        let mut deps: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut validated_at: BTreeMap<&str, u64> = BTreeMap::new();

        for event in &self.events {
            match event.kind {
                EventKind::TaskCreated => {
                    let task: QueryTask = serde_json::from_value(event.payload.clone())
                        .map_err(|e| TranscriptError::Parse {
                            line: event.seq as usize + 1,
                            detail: format!("task-created payload: {e}"),
                        })?;
                    deps.insert(task.id.clone(), task.depends_on.into_iter().collect());
                }
                EventKind::Validated => {
                    if let Some(id) = event.task_id.as_deref() {
                        validated_at.entry(id).or_insert(event.seq);
                    }
                }
                EventKind::AnswerReceived => {
                    let Some(id) = event.task_id.as_deref() else {
                        continue;
                    };
                    if let Some(needed) = deps.get(id) {
                        for dep in needed {
                            match validated_at.get(dep.as_str()) {
                                Some(&at) if at < event.seq => {}
                                _ => {
                                    return Err(TranscriptError::DagOrder {
                                        seq: event.seq,
                                        detail: format!(
                                            "answer for `{id}` precedes validation of `{dep}`"
                                        ),
                                    })
                                }
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn jsonl_round_trips_bit_exactly() {
        let mut t = Transcript::default();
        t.push(EventKind::TaskCreated, Some("a"), json!({"id": "a"}));
        t.push(EventKind::Halted, None, json!({"final_answer": "done"}));
        let text = t.to_jsonl();
        let back = Transcript::from_jsonl(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_jsonl(), text);
    }

    #[test]
    fn kind_strings_are_kebab_case() {
        let mut t = Transcript::default();
        t.push(EventKind::PromptRendered, Some("a"), json!({}));
        assert!(t.to_jsonl().contains(r#""kind":"prompt-rendered""#));
    }

    #[test]
    fn seq_gap_is_detected() {
        let mut t = Transcript::default();
        t.push(EventKind::TaskCreated, Some("a"), json!({}));
        t.events[0].seq = 5;
        assert!(matches!(
            t.verify_invariants(),
            Err(TranscriptError::SeqGap { .. })
        ));
    }

    #[test]
    fn lifecycle_order_is_enforced() {
        let mut t = Transcript::default();
        t.push(EventKind::AnswerReceived, Some("a"), json!({}));
        assert!(matches!(
            t.verify_invariants(),
            Err(TranscriptError::Lifecycle { .. })
        ));

        let mut ok = Transcript::default();
        ok.push(EventKind::TaskCreated, Some("a"), json!({}));
        ok.push(EventKind::PromptRendered, Some("a"), json!({}));
        ok.push(EventKind::AnswerReceived, Some("a"), json!({}));
        ok.push(EventKind::Validated, Some("a"), json!({}));
        // A repair retry opens another prompt/answer/validated round.
        ok.push(EventKind::PromptRendered, Some("a"), json!({}));
        ok.push(EventKind::AnswerReceived, Some("a"), json!({}));
        ok.push(EventKind::Validated, Some("a"), json!({}));
        ok.verify_invariants().unwrap();
    }

    #[test]
    fn parse_error_reports_line_number() {
        let err = Transcript::from_jsonl("{\"seq\":0}\nnot json\n").unwrap_err();
        match err {
            TranscriptError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
