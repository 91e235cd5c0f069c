//! Synthetic corpus generation: balanced grades 3–12, round-robin genres,
//! and a latent difficulty of grade plus seeded Gaussian jitter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ara::{GenrePartition, LabeledArticle, PartitionBlock, MAX_GRADE, MIN_GRADE};
use crate::backends::derive_seed;

use super::SimError;

pub const DEFAULT_N_GENRES: usize = 33;
pub const DEFAULT_SIGMA: f64 = 0.3;
pub const DEFAULT_PARTITION_BLOCKS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub n_articles: usize,
    #[serde(default = "default_n_genres")]
    pub n_genres: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub seed: u64,
}

fn default_n_genres() -> usize {
    DEFAULT_N_GENRES
}
fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

impl CorpusSpec {
    pub fn new(n_articles: usize, seed: u64) -> Self {
        Self {
            n_articles,
            n_genres: DEFAULT_N_GENRES,
            sigma: DEFAULT_SIGMA,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_articles == 0 {
            return Err(SimError::InvalidSpec("n_articles must be positive".into()));
        }
        if self.n_genres == 0 {
            return Err(SimError::InvalidSpec("n_genres must be at least 1".into()));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(SimError::InvalidSpec(format!(
                "sigma must be finite and non-negative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

pub fn genre_name(index: usize) -> String {
    format!("genre-{index:02}")
}

/// Generate the corpus: grades round-robin over 3..=12 (counts within one
/// of each other), genres round-robin, difficulty = grade + sigma·z with z
/// standard normal from the spec seed. Deterministic per spec.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<LabeledArticle>, SimError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let span = (MAX_GRADE - MIN_GRADE + 1) as usize;
    let mut corpus = Vec::with_capacity(spec.n_articles);
    for i in 0..spec.n_articles {
        let grade = MIN_GRADE + (i % span) as u8;
        let z: f64 = StandardNormal.sample(&mut rng);
        let difficulty = grade as f64 + spec.sigma * z;
        corpus.push(
            LabeledArticle::synthetic(
                format!("art-{i:04}"),
                difficulty,
                genre_name(i % spec.n_genres),
                grade,
            )
            .expect("round-robin grades stay in range"),
        );
    }
    Ok(corpus)
}

/// Hash the genre names into blocks of similar size, one grade-assessor
/// role per block. Real corpora supply their own partition files; this is
/// the synthetic default.
pub fn hash_partition(genres: &[String], n_blocks: usize) -> GenrePartition {
    let n_blocks = n_blocks.max(1);
    let mut blocks: Vec<PartitionBlock> = (0..n_blocks)
        .map(|b| PartitionBlock {
            id: format!("block-{b}"),
            genres: Default::default(),
            role: format!("grade-assessor-block-{b}"),
        })
        .collect();
    for genre in genres {
        let slot = (derive_seed(0, genre) % n_blocks as u64) as usize;
        blocks[slot].genres.insert(genre.clone());
    }
    blocks.retain(|b| !b.genres.is_empty());
    GenrePartition::new(blocks).expect("hashed blocks are disjoint")
}

/// The sorted distinct genres of a corpus.
pub fn corpus_genres(corpus: &[LabeledArticle]) -> Vec<String> {
    let mut genres: Vec<String> = corpus
        .iter()
        .map(|a| a.genre.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    genres.sort();
    genres
}
