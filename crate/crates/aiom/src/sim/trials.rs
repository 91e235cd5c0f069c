//! Monte Carlo trials of the readability machine over synthetic corpora.
//! Each trial draws an 80/20 train/test split and fresh reference sets,
//! instantiates the stochastic oracles, runs the local search on every
//! held-out article, and records exact-match against the true grade next
//! to the assessor-only baseline. Trials are independent: per-trial seeds
//! derive from (master seed, trial index) and aggregation is a sum of
//! counts, so the parallel and sequential paths produce identical reports.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ara::{
    initial_grade, local_search_from, predict_genre, GenrePartition, LabeledArticle,
    ReferenceSets, DEFAULT_REFERENCES_PER_GRADE, DEFAULT_THETA, MAX_GRADE, MIN_GRADE,
};
use crate::backends::derive_seed;
use crate::parallel;

use super::corpus::{corpus_genres, hash_partition, DEFAULT_PARTITION_BLOCKS};
use super::report::AccuracyReport;
use super::{NoiseSpec, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "d_k")]
    pub references_per_grade: usize,
    #[serde(default = "d_theta")]
    pub theta: f64,
}

fn d_k() -> usize {
    DEFAULT_REFERENCES_PER_GRADE
}
fn d_theta() -> f64 {
    DEFAULT_THETA
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            references_per_grade: d_k(),
            theta: d_theta(),
        }
    }
}

/// Counts from one trial; aggregation is order-independent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u32,
    pub n_test: u32,
    pub exact: u32,
    pub adjacent: u32,
    pub baseline_exact: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialsResult {
    pub report: AccuracyReport,
    pub per_trial: Vec<TrialOutcome>,
}

/// Run the trials, parallel when the `parallel` feature is enabled.
pub fn run_trials(
    corpus: &[LabeledArticle],
    noise: &NoiseSpec,
    search: &SearchConfig,
    n_trials: u32,
    seed: u64,
) -> Result<TrialsResult, SimError> {
    run_trials_impl(corpus, noise, search, n_trials, seed, parallel::map_batch)
}

/// Always-sequential variant; kept callable so the two execution paths can
/// be compared directly.
pub fn run_trials_seq(
    corpus: &[LabeledArticle],
    noise: &NoiseSpec,
    search: &SearchConfig,
    n_trials: u32,
    seed: u64,
) -> Result<TrialsResult, SimError> {
    run_trials_impl(corpus, noise, search, n_trials, seed, parallel::map_batch_seq)
}

type TrialResults = Vec<Result<TrialOutcome, SimError>>;

fn run_trials_impl<M>(
    corpus: &[LabeledArticle],
    noise: &NoiseSpec,
    search: &SearchConfig,
    n_trials: u32,
    seed: u64,
    map: M,
) -> Result<TrialsResult, SimError>
where
    M: Fn(Vec<u32>, Box<dyn Fn(u32) -> Result<TrialOutcome, SimError> + Sync + Send>) -> TrialResults,
{
    if corpus.is_empty() {
        return Err(SimError::InvalidSpec("corpus is empty".into()));
    }
    if n_trials == 0 {
        return Err(SimError::InvalidSpec("n_trials must be positive".into()));
    }
    noise.validate()?;
    if !(search.theta > 0.0 && search.theta < 1.0) {
        return Err(SimError::InvalidSpec(format!(
            "theta must lie strictly inside (0, 1), got {}",
            search.theta
        )));
    }

    let genres = corpus_genres(corpus);
    let partition = hash_partition(&genres, DEFAULT_PARTITION_BLOCKS);

    let corpus_owned: Vec<LabeledArticle> = corpus.to_vec();
    let noise = noise.clone();
    let search = *search;
    let genres_for_trials = genres.clone();
    let partition_for_trials = partition.clone();

    let outcomes: TrialResults = map(
        (0..n_trials).collect(),
        Box::new(move |trial| {
            run_one_trial(
                &corpus_owned,
                &noise,
                &search,
                &genres_for_trials,
                &partition_for_trials,
                seed,
                trial,
            )
        }),
    );

    let mut per_trial = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        per_trial.push(outcome?);
    }

    let totals = per_trial.iter().fold(TrialOutcome::default(), |mut acc, t| {
        acc.n_test += t.n_test;
        acc.exact += t.exact;
        acc.adjacent += t.adjacent;
        acc.baseline_exact += t.baseline_exact;
        acc
    });
    let n = totals.n_test.max(1) as f64;
    let exact_match = totals.exact as f64 / n;
    let baseline = totals.baseline_exact as f64 / n;
    let report = AccuracyReport {
        exact_match,
        adjacent_accuracy: totals.adjacent as f64 / n,
        baseline_exact_match: baseline,
        absolute_gain_points: (exact_match - baseline) * 100.0,
        relative_gain_percent: if baseline > 0.0 {
            (exact_match - baseline) / baseline * 100.0
        } else {
            0.0
        },
        n_trials,
        seed,
    };
    Ok(TrialsResult { report, per_trial })
}

fn run_one_trial(
    corpus: &[LabeledArticle],
    noise: &NoiseSpec,
    search: &SearchConfig,
    genres: &[String],
    partition: &GenrePartition,
    master_seed: u64,
    trial: u32,
) -> Result<TrialOutcome, SimError> {
    let trial_seed = derive_seed(master_seed, &format!("trial-{trial}"));
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);

    let mut indices: Vec<usize> = (0..corpus.len()).collect();
    indices.shuffle(&mut rng);
    let n_test = (corpus.len() / 5).max(1);
    let (test_idx, train_idx) = indices.split_at(n_test.min(corpus.len()));
    let training: Vec<LabeledArticle> = train_idx.iter().map(|&i| corpus[i].clone()).collect();
    if training.is_empty() {
        return Err(SimError::InvalidSpec(
            "corpus too small for a train/test split".into(),
        ));
    }

    let refs = ReferenceSets::sample(&training, search.references_per_grade, &mut rng)?;
    let oracles = noise.oracle_set(partition, genres.len(), trial_seed)?;

    let mut outcome = TrialOutcome {
        trial,
        ..TrialOutcome::default()
    };
    for &i in test_idx {
        let article = &corpus[i];
        let doc = article.to_document();
        let genre = predict_genre(&doc, genres, &oracles)?;
        let start = initial_grade(&doc, partition, &genre, &oracles)?;
        if start == article.grade {
            outcome.baseline_exact += 1;
        }
        let trace = local_search_from(&doc, start, &refs, search.theta, &oracles)?;
        if trace.final_grade == article.grade {
            outcome.exact += 1;
        }
        if (trace.final_grade as i16 - article.grade as i16).abs() <= 1 {
            outcome.adjacent += 1;
        }
        outcome.n_test += 1;
    }
    Ok(outcome)
}

/// Exhaustive perfect-oracle check: with a perfect comparator, the search
/// must land on the true grade from every possible starting grade for
/// every article. Reference sets are drawn from the whole corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerfectCheck {
    pub checked: u64,
    pub exact: u64,
}

pub fn perfect_oracle_exhaustive(
    corpus: &[LabeledArticle],
    search: &SearchConfig,
    seed: u64,
) -> Result<PerfectCheck, SimError> {
    if corpus.is_empty() {
        return Err(SimError::InvalidSpec("corpus is empty".into()));
    }
    let genres = corpus_genres(corpus);
    let partition = hash_partition(&genres, DEFAULT_PARTITION_BLOCKS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let refs = ReferenceSets::sample(corpus, search.references_per_grade, &mut rng)?;
    let noise = NoiseSpec::perfect();
    let theta = search.theta;

    let refs_shared = std::sync::Arc::new(refs);
    let results: Vec<Result<(u64, u64), SimError>> = parallel::map_batch(
        corpus.to_vec(),
        move |article: LabeledArticle| -> Result<(u64, u64), SimError> {
            let oracles = noise.oracle_set(&partition, genres.len(), seed)?;
            let doc = article.to_document();
            let mut checked = 0;
            let mut exact = 0;
            for start in MIN_GRADE..=MAX_GRADE {
                let trace = local_search_from(&doc, start, &refs_shared, theta, &oracles)?;
                trace.check_invariants()?;
                checked += 1;
                if trace.final_grade == article.grade {
                    exact += 1;
                }
            }
            Ok((checked, exact))
        },
    );

    let mut check = PerfectCheck {
        checked: 0,
        exact: 0,
    };
    for result in results {
        let (c, e) = result?;
        check.checked += c;
        check.exact += e;
    }
    Ok(check)
}

/// Paired-seed slope sweep: same master seed for every slope, so
/// comparisons isolate the signal strength. Used for calibration and the
/// monotonicity check.
pub fn sweep_slopes(
    corpus: &[LabeledArticle],
    base: &NoiseSpec,
    search: &SearchConfig,
    slopes: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<Vec<(f64, AccuracyReport)>, SimError> {
    let mut results = Vec::with_capacity(slopes.len());
    for &slope in slopes {
        let noise = base.clone().with_slope(slope);
        let outcome = run_trials(corpus, &noise, search, n_trials, seed)?;
        results.push((slope, outcome.report));
    }
    Ok(results)
}
