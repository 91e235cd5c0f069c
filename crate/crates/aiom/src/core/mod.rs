//! Domain types of the oracle-machine model and the validation registry.
//! No execution logic lives here; the runtime module drives machines.

mod prompt;
mod types;
pub mod validators;

pub use prompt::{render_prompt, TEMPLATE_ID};
pub use types::{
    Answer, ContextExcerpt, Document, Example, GroundTruth, Modality, OracleBinding,
    PriorExtract, Prompt, QueryTask, TaskSpec, ValidationMethod, ValidationOutcome,
    ValidationStatus,
};
pub use validators::{ValidationContext, Validator, ValidatorRegistry};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("unknown document id `{id}` in context excerpts")]
    UnknownDocument { id: String },
    #[error("duplicate document id `{id}`")]
    DuplicateDocumentId { id: String },
    #[error("document id must be non-empty")]
    EmptyDocumentId,
    #[error("a valid outcome requires at least one extracted span")]
    ValidWithoutSpans,
    #[error("an invalid outcome must not carry extracted spans")]
    InvalidWithSpans,
    #[error("prior extract in task `{task}` references `{source_id}` which is not among its dependencies")]
    DanglingPriorExtract { task: String, source_id: String },
    #[error("validator `{id}` is not registered")]
    UnknownValidator { id: String },
    #[error("invalid validator params for `{validator}`: {detail}")]
    InvalidParams { validator: String, detail: String },
}
