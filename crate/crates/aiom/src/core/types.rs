//! Domain types of the oracle-machine model: ground truth, query-tasks and
//! their six attribute kinds, prompts, answers, validation outcomes, and
//! oracle role bindings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::CoreError;

/// A plain-text reference document, one element of the ground-truth set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl Document {
    pub fn new(id: impl Into<String>, title: impl Into<String>, body: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            body: body.into(),
            metadata: BTreeMap::new(),
        }
    }
}

/// The user-provided reference material a machine run computes over.
/// May be empty. Document ids are unique and non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(try_from = "GroundTruthRepr", into = "GroundTruthRepr")]
pub struct GroundTruth {
    documents: Vec<Document>,
}

#[derive(Serialize, Deserialize)]
struct GroundTruthRepr {
    documents: Vec<Document>,
}

impl TryFrom<GroundTruthRepr> for GroundTruth {
    type Error = CoreError;
    fn try_from(repr: GroundTruthRepr) -> Result<Self, CoreError> {
        GroundTruth::new(repr.documents)
    }
}

impl From<GroundTruth> for GroundTruthRepr {
    fn from(truth: GroundTruth) -> Self {
        GroundTruthRepr {
            documents: truth.documents,
        }
    }
}

impl GroundTruth {
    pub fn new(documents: Vec<Document>) -> Result<Self, CoreError> {
        let mut seen = BTreeSet::new();
        for doc in &documents {
            if doc.id.is_empty() {
                return Err(CoreError::EmptyDocumentId);
            }
            if !seen.insert(doc.id.clone()) {
                return Err(CoreError::DuplicateDocumentId { id: doc.id.clone() });
            }
        }
        Ok(Self { documents })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// The overall task a machine run answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub statement: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, String>,
}

impl TaskSpec {
    pub fn new(statement: impl Into<String>) -> Self {
        Self {
            statement: statement.into(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn with_parameter(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.parameters.insert(key.into(), value.into());
        self
    }
}

/// Text pulled verbatim from a ground-truth document (attribute 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextExcerpt {
    pub document_id: String,
    pub text: String,
}

/// A validated span carried over from an earlier query-task (attribute 2).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorExtract {
    pub source_task_id: String,
    pub text: String,
}

/// An input/output illustration of the desired answer shape (attribute 4).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub input: String,
    pub output: String,
}

/// Validator id plus parameters (attribute 6).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationMethod {
    pub validator: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl ValidationMethod {
    pub fn new(validator: impl Into<String>) -> Self {
        Self {
            validator: validator.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: serde_json::Value) -> Self {
        self.params.insert(key.into(), value);
        self
    }
}

/// One unit of oracle interaction: a task description plus the six
/// attribute kinds, dependency edges, and the role that answers it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTask {
    pub id: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub context_excerpts: Vec<ContextExcerpt>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prior_extracts: Vec<PriorExtract>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub requirements: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub examples: Vec<Example>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<String>,
    pub validation_method: ValidationMethod,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub depends_on: BTreeSet<String>,
    pub oracle_role: String,
}

impl QueryTask {
    pub fn new(
        id: impl Into<String>,
        description: impl Into<String>,
        validation_method: ValidationMethod,
        oracle_role: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            context_excerpts: Vec::new(),
            prior_extracts: Vec::new(),
            requirements: Vec::new(),
            examples: Vec::new(),
            constraints: Vec::new(),
            validation_method,
            depends_on: BTreeSet::new(),
            oracle_role: oracle_role.into(),
        }
    }

    /// Every prior-extract source must appear among the dependency edges.
    pub fn check_edges(&self) -> Result<(), CoreError> {
        for extract in &self.prior_extracts {
            if !self.depends_on.contains(&extract.source_task_id) {
                return Err(CoreError::DanglingPriorExtract {
                    task: self.id.clone(),
                    source_id: extract.source_task_id.clone(),
                });
            }
        }
        Ok(())
    }
}

/// A fully rendered oracle prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub rendered_text: String,
    pub template_id: String,
    pub role: String,
}

/// An oracle's answer to one query-task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub query_task_id: String,
    pub text: String,
    pub oracle_id: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

impl Answer {
    pub fn new(
        query_task_id: impl Into<String>,
        text: impl Into<String>,
        oracle_id: impl Into<String>,
    ) -> Self {
        Self {
            query_task_id: query_task_id.into(),
            text: text.into(),
            oracle_id: oracle_id.into(),
            meta: BTreeMap::new(),
        }
    }
}

/// Verdict on an answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationStatus {
    Valid,
    Partial,
    Invalid,
}

/// Verdict plus the extracted spans that feed the next cycle.
///
/// Invariants enforced by the constructors: a valid outcome carries at
/// least one span, an invalid outcome carries none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationOutcome {
    pub status: ValidationStatus,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extracted_spans: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl ValidationOutcome {
    pub fn valid(extracted_spans: Vec<String>) -> Result<Self, CoreError> {
        if extracted_spans.is_empty() {
            return Err(CoreError::ValidWithoutSpans);
        }
        Ok(Self {
            status: ValidationStatus::Valid,
            extracted_spans,
            diagnostics: Vec::new(),
        })
    }

    pub fn partial(extracted_spans: Vec<String>, diagnostics: Vec<String>) -> Self {
        Self {
            status: ValidationStatus::Partial,
            extracted_spans,
            diagnostics,
        }
    }

    pub fn invalid(diagnostics: Vec<String>) -> Self {
        Self {
            status: ValidationStatus::Invalid,
            extracted_spans: Vec::new(),
            diagnostics,
        }
    }

    /// Valid and partial outcomes satisfy dependencies; invalid does not.
    pub fn satisfies_dependency(&self) -> bool {
        matches!(
            self.status,
            ValidationStatus::Valid | ValidationStatus::Partial
        )
    }

    pub fn check_invariants(&self) -> Result<(), CoreError> {
        match self.status {
            ValidationStatus::Valid if self.extracted_spans.is_empty() => {
                Err(CoreError::ValidWithoutSpans)
            }
            ValidationStatus::Invalid if !self.extracted_spans.is_empty() => {
                Err(CoreError::InvalidWithSpans)
            }
            _ => Ok(()),
        }
    }
}

/// Oracle modality. Vision parses but is rejected at dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Language,
    Reasoning,
    Vision,
}

/// A named oracle role mapped to a backend. The set of bindings of a
/// machine definition is its oracle set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBinding {
    pub role: String,
    pub modality: Modality,
    pub backend_ref: String,
}

impl OracleBinding {
    pub fn new(
        role: impl Into<String>,
        modality: Modality,
        backend_ref: impl Into<String>,
    ) -> Self {
        Self {
            role: role.into(),
            modality,
            backend_ref: backend_ref.into(),
        }
    }
}
