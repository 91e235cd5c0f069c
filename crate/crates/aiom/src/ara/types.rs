//! Domain types of the readability machine: labeled corpus items, genre
//! partitions, per-grade reference sets, comparison scores, and search
//! traces.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::core::Document;

use super::AraError;

pub const MIN_GRADE: u8 = 3;
pub const MAX_GRADE: u8 = 12;
pub const GRADE_SPAN: usize = (MAX_GRADE - MIN_GRADE + 1) as usize;

/// A corpus item: real text, or a latent difficulty scalar for synthetic
/// corpora. Grades span 3 through 12.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArticleRepr", into = "ArticleRepr")]
pub struct LabeledArticle {
    pub id: String,
    pub content: ArticleContent,
    pub genre: String,
    pub grade: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArticleContent {
    Text(String),
    Difficulty(f64),
}

#[derive(Serialize, Deserialize)]
struct ArticleRepr {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    difficulty: Option<f64>,
    genre: String,
    grade: u8,
}

impl TryFrom<ArticleRepr> for LabeledArticle {
    type Error = AraError;
    fn try_from(repr: ArticleRepr) -> Result<Self, AraError> {
        let content = match (repr.text, repr.difficulty) {
            (Some(text), None) => ArticleContent::Text(text),
            (None, Some(d)) => ArticleContent::Difficulty(d),
            _ => {
                return Err(AraError::InvalidArticle(format!(
                    "article `{}` needs exactly one of `text` or `difficulty`",
                    repr.id
                )))
            }
        };
        LabeledArticle::new(repr.id, content, repr.genre, repr.grade)
    }
}

impl From<LabeledArticle> for ArticleRepr {
    fn from(article: LabeledArticle) -> Self {
        let (text, difficulty) = match article.content {
            ArticleContent::Text(t) => (Some(t), None),
            ArticleContent::Difficulty(d) => (None, Some(d)),
        };
        ArticleRepr {
            id: article.id,
            text,
            difficulty,
            genre: article.genre,
            grade: article.grade,
        }
    }
}

impl LabeledArticle {
    pub fn new(
        id: impl Into<String>,
        content: ArticleContent,
        genre: impl Into<String>,
        grade: u8,
    ) -> Result<Self, AraError> {
        if !(MIN_GRADE..=MAX_GRADE).contains(&grade) {
            return Err(AraError::GradeOutOfRange(grade));
        }
        Ok(Self {
            id: id.into(),
            content,
            genre: genre.into(),
            grade,
        })
    }

    pub fn synthetic(
        id: impl Into<String>,
        difficulty: f64,
        genre: impl Into<String>,
        grade: u8,
    ) -> Result<Self, AraError> {
        Self::new(id, ArticleContent::Difficulty(difficulty), genre, grade)
    }

    pub fn difficulty(&self) -> Option<f64> {
        match &self.content {
            ArticleContent::Difficulty(d) => Some(*d),
            ArticleContent::Text(_) => None,
        }
    }

    /// Body text as seen by oracles. Synthetic articles expose their
    /// latent attributes in a fixed machine-readable form.
    pub fn body(&self) -> String {
        match &self.content {
            ArticleContent::Text(text) => text.clone(),
            ArticleContent::Difficulty(d) => {
                format!("difficulty={d:.6} grade={} genre={}", self.grade, self.genre)
            }
        }
    }

    pub fn to_document(&self) -> Document {
        Document::new(self.id.clone(), self.id.clone(), self.body())
    }

    /// Reference-side view of the same article, with a prefixed document
    /// id so an article can be compared against itself without colliding.
    pub fn to_reference_document(&self) -> Document {
        Document::new(format!("ref:{}", self.id), self.id.clone(), self.body())
    }
}

/// Genre blocks, each served by its own grade-assessor role. Blocks are
/// disjoint; their union is the configured genre set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct GenrePartition {
    blocks: Vec<PartitionBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionBlock {
    pub id: String,
    pub genres: BTreeSet<String>,
    pub role: String,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    blocks: Vec<PartitionBlock>,
}

impl TryFrom<PartitionRepr> for GenrePartition {
    type Error = AraError;
    fn try_from(repr: PartitionRepr) -> Result<Self, AraError> {
        GenrePartition::new(repr.blocks)
    }
}

impl From<GenrePartition> for PartitionRepr {
    fn from(p: GenrePartition) -> Self {
        PartitionRepr { blocks: p.blocks }
    }
}

impl GenrePartition {
    pub fn new(blocks: Vec<PartitionBlock>) -> Result<Self, AraError> {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for block in &blocks {
            for genre in &block.genres {
                if !seen.insert(genre) {
                    return Err(AraError::OverlappingPartition(genre.clone()));
                }
            }
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[PartitionBlock] {
        &self.blocks
    }

    /// All configured genres (the union of the blocks), sorted.
    pub fn genres(&self) -> Vec<String> {
        self.blocks
            .iter()
            .flat_map(|b| b.genres.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn block_for(&self, genre: &str) -> Option<&PartitionBlock> {
        let needle = genre.to_lowercase();
        self.blocks
            .iter()
            .find(|b| b.genres.iter().any(|g| g.to_lowercase() == needle))
    }

    pub fn roles(&self) -> Vec<String> {
        self.blocks.iter().map(|b| b.role.clone()).collect()
    }
}

/// Per-grade reference articles from the training data; every grade keeps
/// at least one, and every reference carries the grade it stands for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ReferenceSetsRepr", into = "ReferenceSetsRepr")]
pub struct ReferenceSets {
    per_grade: BTreeMap<u8, Vec<LabeledArticle>>,
}

#[derive(Serialize, Deserialize)]
struct ReferenceSetsRepr {
    per_grade: BTreeMap<u8, Vec<LabeledArticle>>,
}

impl TryFrom<ReferenceSetsRepr> for ReferenceSets {
    type Error = AraError;
    fn try_from(repr: ReferenceSetsRepr) -> Result<Self, AraError> {
        ReferenceSets::new(repr.per_grade)
    }
}

impl From<ReferenceSets> for ReferenceSetsRepr {
    fn from(r: ReferenceSets) -> Self {
        ReferenceSetsRepr {
            per_grade: r.per_grade,
        }
    }
}

impl ReferenceSets {
    pub fn new(per_grade: BTreeMap<u8, Vec<LabeledArticle>>) -> Result<Self, AraError> {
        for grade in MIN_GRADE..=MAX_GRADE {
            match per_grade.get(&grade) {
                Some(refs) if !refs.is_empty() => {
                    if let Some(bad) = refs.iter().find(|r| r.grade != grade) {
                        return Err(AraError::InvalidArticle(format!(
                            "reference `{}` carries grade {} but is filed under {grade}",
                            bad.id, bad.grade
                        )));
                    }
                }
                _ => return Err(AraError::EmptyReferences(grade)),
            }
        }
        Ok(Self { per_grade })
    }

    /// Sample k references per grade from training data, seeded.
    pub fn sample<R: rand::Rng>(
        training: &[LabeledArticle],
        k: usize,
        rng: &mut R,
    ) -> Result<Self, AraError> {
        use rand::seq::SliceRandom;
        let mut per_grade = BTreeMap::new();
        for grade in MIN_GRADE..=MAX_GRADE {
            let mut pool: Vec<LabeledArticle> = training
                .iter()
                .filter(|a| a.grade == grade)
                .cloned()
                .collect();
            if pool.is_empty() {
                return Err(AraError::EmptyReferences(grade));
            }
            pool.shuffle(rng);
            pool.truncate(k.max(1));
            per_grade.insert(grade, pool);
        }
        Self::new(per_grade)
    }

    pub fn at(&self, grade: u8) -> &[LabeledArticle] {
        self.per_grade
            .get(&grade)
            .map_or(&[], Vec::as_slice)
    }
}

/// Numeric encoding of one pairwise comparison: +1 the input is strictly
/// harder than the reference, −1 strictly easier, 0 indistinguishable.
/// Values between encode graded confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonScore(f64);

impl ComparisonScore {
    pub fn new(value: f64) -> Result<Self, AraError> {
        if value.is_nan() || !(-1.0..=1.0).contains(&value) {
            return Err(AraError::ScoreOutOfRange(value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HaltReason {
    WithinThreshold,
    Oscillation,
    Boundary,
    IterationCap,
}

/// The visited (grade, mean score) path of one local search and how it
/// concluded. Consecutive visited grades differ by exactly one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub visited: Vec<(u8, f64)>,
    pub final_grade: u8,
    pub halt_reason: HaltReason,
}

impl SearchTrace {
    pub fn check_invariants(&self) -> Result<(), AraError> {
        if !(MIN_GRADE..=MAX_GRADE).contains(&self.final_grade) {
            return Err(AraError::GradeOutOfRange(self.final_grade));
        }
        for pair in self.visited.windows(2) {
            let (a, b) = (pair[0].0 as i16, pair[1].0 as i16);
            if (a - b).abs() != 1 {
                return Err(AraError::InvalidTrace(format!(
                    "visited grades {a} and {b} are not adjacent"
                )));
            }
        }
        for (grade, _) in &self.visited {
            if !(MIN_GRADE..=MAX_GRADE).contains(grade) {
                return Err(AraError::GradeOutOfRange(*grade));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grade_bounds_are_enforced() {
        assert!(LabeledArticle::synthetic("a", 5.0, "g", 2).is_err());
        assert!(LabeledArticle::synthetic("a", 5.0, "g", 13).is_err());
        assert!(LabeledArticle::synthetic("a", 5.0, "g", 3).is_ok());
        assert!(LabeledArticle::synthetic("a", 12.4, "g", 12).is_ok());
    }

    #[test]
    fn article_json_uses_text_or_difficulty() {
        let synth = LabeledArticle::synthetic("a", 7.25, "genre-01", 7).unwrap();
        let json = serde_json::to_string(&synth).unwrap();
        assert_eq!(
            json,
            r#"{"id":"a","difficulty":7.25,"genre":"genre-01","grade":7}"#
        );
        let back: LabeledArticle = serde_json::from_str(&json).unwrap();
        assert_eq!(back, synth);

        let textual: LabeledArticle = serde_json::from_str(
            r#"{"id":"b","text":"Once upon a time.","genre":"fiction","grade":4}"#,
        )
        .unwrap();
        assert_eq!(textual.body(), "Once upon a time.");

        assert!(serde_json::from_str::<LabeledArticle>(
            r#"{"id":"c","genre":"g","grade":4}"#
        )
        .is_err());
    }

    #[test]
    fn synthetic_body_exposes_latent_attributes() {
        let article = LabeledArticle::synthetic("a", 7.5, "genre-03", 7).unwrap();
        assert_eq!(article.body(), "difficulty=7.500000 grade=7 genre=genre-03");
    }

    #[test]
    fn partition_rejects_overlapping_blocks() {
        let block = |id: &str, genres: &[&str]| PartitionBlock {
            id: id.into(),
            genres: genres.iter().map(|s| s.to_string()).collect(),
            role: format!("grade-assessor-{id}"),
        };
        assert!(GenrePartition::new(vec![
            block("a", &["poetry", "news"]),
            block("b", &["news"]),
        ])
        .is_err());

        let partition =
            GenrePartition::new(vec![block("a", &["poetry"]), block("b", &["news"])]).unwrap();
        assert_eq!(partition.genres(), vec!["news", "poetry"]);
        assert_eq!(partition.block_for("Poetry").unwrap().id, "a");
        assert!(partition.block_for("unknown").is_none());
    }

    #[test]
    fn reference_sets_require_every_grade() {
        let mut per_grade = BTreeMap::new();
        for grade in MIN_GRADE..=MAX_GRADE {
            per_grade.insert(
                grade,
                vec![LabeledArticle::synthetic(format!("r{grade}"), grade as f64, "g", grade)
                    .unwrap()],
            );
        }
        ReferenceSets::new(per_grade.clone()).unwrap();
        per_grade.remove(&7);
        assert!(matches!(
            ReferenceSets::new(per_grade),
            Err(AraError::EmptyReferences(7))
        ));
    }

    #[test]
    fn comparison_scores_live_in_unit_interval() {
        assert!(ComparisonScore::new(1.0).is_ok());
        assert!(ComparisonScore::new(-1.0).is_ok());
        assert!(ComparisonScore::new(0.25).is_ok());
        assert!(ComparisonScore::new(1.1).is_err());
        assert!(ComparisonScore::new(f64::NAN).is_err());
    }

    #[test]
    fn trace_invariants_catch_jumps() {
        let trace = SearchTrace {
            visited: vec![(5, 1.0), (7, 0.0)],
            final_grade: 7,
            halt_reason: HaltReason::WithinThreshold,
        };
        assert!(trace.check_invariants().is_err());
    }
}
