//! Replay: re-execute a machine with a backend that answers every query
//! from the transcript's recorded answers. A faithful transcript replays to
//! byte-identical output; any edit or definition mismatch surfaces as a
//! divergence naming the first differing event.

use std::collections::{BTreeMap, VecDeque};
use std::sync::{Arc, Mutex};

use crate::backends::{BackendError, OracleBackend, QueryCtx};
use crate::core::{Answer, GroundTruth, Prompt, TaskSpec};

use super::run::Runtime;
use super::transcript::{EventKind, Transcript};
use super::{MachineDefinition, ReplayError};

/// Answers queries from the recorded answer-received events, one FIFO
/// queue per task id so repair retries replay in order.
struct ReplayBackend {
    answers: Mutex<BTreeMap<String, VecDeque<Answer>>>,
}

impl ReplayBackend {
    fn from_transcript(transcript: &Transcript) -> Result<Self, ReplayError> {
        let mut answers: BTreeMap<String, VecDeque<Answer>> = BTreeMap::new();
        for event in &transcript.events {
            if event.kind != EventKind::AnswerReceived {
                continue;
            }
            let answer: Answer = serde_json::from_value(event.payload.clone()).map_err(|e| {
                ReplayError::Malformed(format!(
                    "answer-received payload at seq {}: {e}",
                    event.seq
                ))
            })?;
            let task_id = event.task_id.clone().ok_or_else(|| {
                ReplayError::Malformed(format!("answer-received at seq {} lacks task id", event.seq))
            })?;
            answers.entry(task_id).or_default().push_back(answer);
        }
        Ok(Self {
            answers: Mutex::new(answers),
        })
    }
}

impl OracleBackend for ReplayBackend {
    fn id(&self) -> &str {
        "replay"
    }

    fn query(&self, _prompt: &Prompt, ctx: &QueryCtx<'_>) -> Result<Answer, BackendError> {
        let mut answers = self.answers.lock().expect("replay queue lock");
        answers
            .get_mut(ctx.task_id)
            .and_then(VecDeque::pop_front)
            .ok_or_else(|| {
                BackendError::Config(format!(
                    "transcript holds no recorded answer for task `{}`",
                    ctx.task_id
                ))
            })
    }
}

pub(super) fn replay(
    runtime: &Runtime,
    transcript: &Transcript,
    machine: &MachineDefinition,
    truth: &GroundTruth,
    task: &TaskSpec,
    seed: u64,
) -> Result<Transcript, ReplayError> {
    if transcript.is_empty() {
        return Err(ReplayError::NoEvents);
    }
    let backend = Arc::new(ReplayBackend::from_transcript(transcript)?);
    let backends: BTreeMap<String, Arc<dyn OracleBackend>> = machine
        .bindings
        .iter()
        .map(|b| (b.role.clone(), Arc::clone(&backend) as Arc<dyn OracleBackend>))
        .collect();

    let replayed = match runtime.run_with_backends(machine, &backends, truth, task, seed) {
        Ok(output) => output.transcript,
        Err(failure) => {
            return Err(first_divergence(transcript, &failure.transcript)
                .unwrap_or(ReplayError::Failed(failure.error.to_string())));
        }
    };

    if replayed.to_jsonl() == transcript.to_jsonl() {
        Ok(replayed)
    } else {
        Err(first_divergence(transcript, &replayed)
            .expect("unequal transcripts have a divergent event"))
    }
}

fn first_divergence(expected: &Transcript, got: &Transcript) -> Option<ReplayError> {
    for (idx, want) in expected.events.iter().enumerate() {
        match got.events.get(idx) {
            Some(have) if have == want => continue,
            Some(have) => {
                let detail = if want.kind == have.kind {
                    format!(
                        "{:?} event for task {:?} differs from the recorded one",
                        want.kind, want.task_id
                    )
                } else {
                    format!(
                        "expected {:?} event, replay produced {:?}",
                        want.kind, have.kind
                    )
                };
                return Some(ReplayError::Divergence {
                    seq: want.seq,
                    detail,
                });
            }
            None => {
                return Some(ReplayError::Divergence {
                    seq: want.seq,
                    detail: "replay ended early".into(),
                })
            }
        }
    }
    got.events.get(expected.events.len()).map(|extra| ReplayError::Divergence {
        seq: extra.seq,
        detail: "replay produced extra events".into(),
    })
}
