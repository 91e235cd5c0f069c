//! Acceptance suite: one test per shipped claim, each printing a pass line
//! with its measured numbers (run with `--nocapture` to see them).
//!
//! 1. Perfect-oracle search is exact from every starting grade.
//! 2. The reference noise configuration lifts exact-match accuracy at
//!    least ten points over a ~50% assessor baseline.
//! 3. An uninformative comparator neither helps nor hurts.
//! 4. Ten thousand adversarial comparators cannot stall the search.
//! 5. Diversity ranking equals the exhaustive greedy reference; budget
//!    selection is monotone.
//! 6. A hundred randomized machines run byte-identically twice and replay
//!    as a fixed point, preserving dependency order.
//! 7. Context excerpts are verbatim article sentences and planted
//!    duplicate sentences are pruned, on all twenty fixtures.
//! 8. Config, corpus, partition, and transcript files parse and emit
//!    bit-exactly against the golden fixtures.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aiom::ara::{
    local_search_from, LabeledArticle, ReferenceSets, COMPARATOR_ROLE, MAX_GRADE, MIN_GRADE,
};
use aiom::backends::{OracleBackend, StochasticBackend};
use aiom::core::{
    GroundTruth, Modality, OracleBinding, QueryTask, TaskSpec, ValidationMethod,
};
use aiom::runtime::{
    BackendConfig, Controller, ControllerCtx, ControllerSpec, ControllerStep, EventKind,
    MachineDefinition, MachineState, RuleParams, RunLimits, Runtime, RuntimeError,
    ScriptedParams, Transcript,
};
use aiom::sim::{
    generate_corpus, perfect_oracle_exhaustive, run_trials, CorpusSpec, NoiseSpec, SearchConfig,
};
use aiom::summarizer::{
    rank_diverse, score_all, segment_sentences, select_budget, validate_summary, SummarySpec,
};

#[test]
fn criterion_1_perfect_oracle_search_is_exact() {
    let started = Instant::now();
    let corpus = generate_corpus(&CorpusSpec {
        n_genres: 33,
        sigma: 0.3,
        ..CorpusSpec::new(500, 7)
    })
    .unwrap();
    let check = perfect_oracle_exhaustive(&corpus, &SearchConfig::default(), 7).unwrap();
    let elapsed = started.elapsed();

    assert_eq!(check.checked, 500 * 10, "every article from every start");
    assert_eq!(
        check.exact, check.checked,
        "perfect oracles must reach the true grade every time"
    );
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "perfect-oracle check took {elapsed:?}, budget is 5 s"
    );
    println!(
        "acceptance criterion 1 (perfect-oracle exactness): PASS — {}/{} exact in {elapsed:?}",
        check.exact, check.checked
    );
}

#[test]
fn criterion_2_reference_config_improves_at_least_ten_points() {
    let started = Instant::now();
    let corpus = generate_corpus(&CorpusSpec::new(1654, 1654)).unwrap();
    let result = run_trials(
        &corpus,
        &NoiseSpec::default(),
        &SearchConfig::default(),
        50,
        42,
    )
    .unwrap();
    let elapsed = started.elapsed();
    let report = &result.report;

    assert!(
        (0.48..=0.52).contains(&report.baseline_exact_match),
        "measured baseline {} outside [0.48, 0.52]",
        report.baseline_exact_match
    );
    assert!(
        report.exact_match >= report.baseline_exact_match + 0.10,
        "gain {} points is below the 10-point bar",
        report.absolute_gain_points
    );
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "reference simulation took {elapsed:?}, budget is 60 s"
    );
    // The headline target is reported, not asserted: it holds only under
    // the calibrated noise model.
    println!(
        "acceptance criterion 2 (improvement pattern): PASS — baseline {:.4} → exact {:.4} \
         ({:+.1} points; target pattern 0.50 → >0.65) in {elapsed:?}",
        report.baseline_exact_match, report.exact_match, report.absolute_gain_points
    );
}

#[test]
fn criterion_3_uninformative_comparator_changes_nothing() {
    let corpus = generate_corpus(&CorpusSpec::new(500, 99)).unwrap();
    let result = run_trials(
        &corpus,
        &NoiseSpec::default().with_slope(0.0),
        &SearchConfig::default(),
        10,
        7,
    )
    .unwrap();
    let article_trials: u32 = result.per_trial.iter().map(|t| t.n_test).sum();
    assert!(article_trials >= 1000, "need at least 1000 article-trials");

    let delta = (result.report.exact_match - result.report.baseline_exact_match).abs();
    assert!(
        delta <= 0.03,
        "slope-0 search moved accuracy by {delta} (> 3 points)"
    );
    println!(
        "acceptance criterion 3 (uninformative-comparator null): PASS — |Δ| = {:.4} over {} article-trials",
        delta, article_trials
    );
}

#[test]
fn criterion_4_ten_thousand_adversarial_comparators_always_halt() {
    let mut refs_map = BTreeMap::new();
    for grade in MIN_GRADE..=MAX_GRADE {
        refs_map.insert(
            grade,
            vec![
                LabeledArticle::synthetic(format!("ref-{grade}"), grade as f64, "genre-00", grade)
                    .unwrap(),
            ],
        );
    }
    let refs = Arc::new(ReferenceSets::new(refs_map).unwrap());

    let cases: Vec<u64> = (0..10_000).collect();
    let failures: Vec<String> = aiom::parallel::map_batch(cases, |case| {
        let mut rng = ChaCha8Rng::seed_from_u64(case);
        let p_garbage: f64 = rng.random_range(0.0..0.6);
        let theta: f64 = rng.random_range(0.01..0.95);
        let start: u8 = rng.random_range(MIN_GRADE..=MAX_GRADE);
        let grade: u8 = rng.random_range(MIN_GRADE..=MAX_GRADE);

        let comparator: Arc<dyn OracleBackend> = Arc::new(
            StochasticBackend::new(
                "adversarial-comparator",
                BTreeMap::from([("p_garbage".to_string(), p_garbage)]),
            )
            .unwrap(),
        );
        let oracles = aiom::ara::OracleSet::new(
            BTreeMap::from([(COMPARATOR_ROLE.to_string(), comparator)]),
            case,
        );
        let doc = LabeledArticle::synthetic(format!("fuzz-{case}"), grade as f64, "genre-00", grade)
            .unwrap()
            .to_document();
        match local_search_from(&doc, start, &refs, theta, &oracles) {
            Ok(trace) => {
                if trace.visited.len() > 10 {
                    return format!("case {case}: {} rounds", trace.visited.len());
                }
                if let Err(e) = trace.check_invariants() {
                    return format!("case {case}: invariant violation {e}");
                }
                String::new()
            }
            Err(e) => format!("case {case}: error {e}"),
        }
    })
    .into_iter()
    .filter(|s| !s.is_empty())
    .collect();

    assert!(failures.is_empty(), "failures: {:?}", &failures[..failures.len().min(5)]);
    println!(
        "acceptance criterion 4 (termination fuzz): PASS — 10000 adversarial comparators all halted within 10 rounds"
    );
}

mod mmr_oracle {
    //! Independent exhaustive greedy reference for diversity ranking. Its
    //! own tokenizer and cosine keep it decoupled from the library path.

    pub fn tokens(text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect()
    }

    fn counts(text: &str) -> std::collections::HashMap<String, f64> {
        let mut map = std::collections::HashMap::new();
        for token in tokens(text) {
            if aiom::text::is_stopword(&token) {
                continue;
            }
            *map.entry(token).or_insert(0.0) += 1.0;
        }
        map
    }

    pub fn cosine(a: &str, b: &str) -> f64 {
        let (ca, cb) = (counts(a), counts(b));
        if ca.is_empty() || cb.is_empty() {
            return 0.0;
        }
        let dot: f64 = ca
            .iter()
            .filter_map(|(t, x)| cb.get(t).map(|y| x * y))
            .sum();
        let na: f64 = ca.values().map(|v| v * v).sum::<f64>().sqrt();
        let nb: f64 = cb.values().map(|v| v * v).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na * nb)
        }
    }

    /// Exhaustive greedy: at every step recompute the score of every
    /// unselected sentence from scratch and take the strict maximum
    /// (earlier index wins ties).
    pub fn greedy_order(sentences: &[(usize, String, f64)], lambda: f64) -> Vec<usize> {
        let mut selected: Vec<usize> = Vec::new();
        let mut remaining: Vec<usize> = (0..sentences.len()).collect();
        while !remaining.is_empty() {
            let mut best: Option<(usize, f64)> = None;
            for &candidate in &remaining {
                let max_sim = selected
                    .iter()
                    .map(|&s| cosine(&sentences[candidate].1, &sentences[s].1))
                    .fold(0.0_f64, f64::max);
                let score = lambda * sentences[candidate].2 - (1.0 - lambda) * max_sim;
                if best.is_none_or(|(_, b)| score > b) {
                    best = Some((candidate, score));
                }
            }
            let (pick, _) = best.unwrap();
            selected.push(pick);
            remaining.retain(|&i| i != pick);
        }
        selected.into_iter().map(|i| sentences[i].0).collect()
    }
}

fn fixture_articles(n: usize, seed: u64) -> Vec<String> {
    let subjects = ["Solar panels", "Wind turbines", "Batteries", "Power grids", "Heat pumps"];
    let verbs = ["convert", "store", "balance", "deliver", "reduce"];
    let objects = [
        "sunlight into electricity",
        "excess energy for later",
        "variable output across regions",
        "clean power to homes",
        "fuel use in winter",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let n_sentences = rng.random_range(2..=8);
            (0..n_sentences)
                .map(|_| {
                    format!(
                        "{} {} {}.",
                        subjects[rng.random_range(0..subjects.len())],
                        verbs[rng.random_range(0..verbs.len())],
                        objects[rng.random_range(0..objects.len())]
                    )
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

#[test]
fn criterion_5_ranking_matches_exhaustive_greedy_reference() {
    let bodies = fixture_articles(60, 2024);
    assert!(bodies.len() >= 50);
    let lambdas = [0.0, 0.3, 0.5, 0.7, 1.0];
    let topic = "solar energy storage";

    let mut checked = 0usize;
    for (i, body) in bodies.iter().enumerate() {
        let doc = aiom::core::Document::new(format!("fixture-{i}"), "Fixture", body.clone());
        let sentences = score_all(segment_sentences(&doc), topic);
        assert!(sentences.len() <= 8);
        let lambda = lambdas[i % lambdas.len()];
        let spec = SummarySpec::new(topic, 50)
            .unwrap()
            .with_diversity_weight(lambda)
            .unwrap();

        let ranked = rank_diverse(&sentences, &spec).unwrap();
        let got: Vec<usize> = ranked.iter().map(|s| s.index).collect();

        let oracle_input: Vec<(usize, String, f64)> = sentences
            .iter()
            .map(|s| {
                (
                    s.index,
                    s.text.clone(),
                    mmr_oracle::cosine(&s.text, topic),
                )
            })
            .collect();
        let expected = mmr_oracle::greedy_order(&oracle_input, lambda);
        assert_eq!(got, expected, "fixture {i} (lambda {lambda}) diverged");
        checked += 1;

        // Budget monotonicity across the stated budgets.
        let mut previous = 0usize;
        for budget in [1usize, 5, 10, 50, 10_000] {
            let spec = SummarySpec::new(topic, budget)
                .unwrap()
                .with_diversity_weight(lambda)
                .unwrap();
            let n = select_budget(&ranked, &spec).len();
            assert!(n >= previous, "fixture {i}: budget {budget} shrank the selection");
            previous = n;
        }
    }
    println!(
        "acceptance criterion 5 (diversity-ranking oracle equivalence): PASS — {checked} fixtures match the exhaustive reference"
    );
}

/// Emits a seeded random task DAG in waves; wave w tasks depend on a
/// random subset of wave w−1. Some tasks use a term check that their
/// scripted answers fail, exercising retry and branch failure.
struct RandomDagController {
    seed: u64,
}

const WAVES: usize = 3;

impl RandomDagController {
    fn plan(&self) -> Vec<Vec<QueryTask>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut waves: Vec<Vec<QueryTask>> = Vec::new();
        for wave in 0..WAVES {
            let n: usize = rng.random_range(1..=3);
            let mut tasks = Vec::new();
            for i in 0..n {
                let id = format!("w{wave}t{i}");
                let term_check: bool = rng.random::<f64>() < 0.3;
                let mut task = QueryTask::new(
                    &id,
                    format!("work item {id}"),
                    if term_check {
                        ValidationMethod::new("contains-terms")
                            .with_param("terms", serde_json::json!(["alpha"]))
                    } else {
                        ValidationMethod::new("always-accept")
                    },
                    "default",
                );
                if let Some(previous) = waves.last() {
                    for prev in previous {
                        if rng.random::<f64>() < 0.5 {
                            task.depends_on.insert(prev.id.clone());
                        }
                    }
                }
                tasks.push(task);
            }
            waves.push(tasks);
        }
        waves
    }
}

impl Controller for RandomDagController {
    fn step(
        &self,
        state: &MachineState,
        _ctx: &ControllerCtx<'_>,
    ) -> Result<ControllerStep, RuntimeError> {
        let waves = self.plan();
        for wave in &waves {
            let missing: Vec<QueryTask> = wave
                .iter()
                .filter(|t| state.task(&t.id).is_none())
                .cloned()
                .collect();
            if !missing.is_empty() {
                // A wave is emitted only once all previous waves resolved;
                // dependency edges gate dispatch on validations.
                return Ok(ControllerStep::Continue(missing));
            }
            if !wave.iter().all(|t| state.is_resolved(&t.id)) {
                return Ok(ControllerStep::Continue(vec![]));
            }
        }
        let mut digest = String::new();
        for wave in &waves {
            for task in wave {
                if let Some(v) = state.validation(&task.id) {
                    if v.satisfies_dependency() {
                        digest.push_str(&v.extracted_spans.join("|"));
                    } else {
                        digest.push_str("<failed>");
                    }
                    digest.push(';');
                }
            }
        }
        Ok(ControllerStep::Finish(digest))
    }
}

fn random_machine(seed: u64) -> MachineDefinition {
    // Half the tasks answer with the required term, the rest without, so
    // term-checked tasks exercise the repair path deterministically.
    let rules = vec![
        RuleParams {
            substring: Some("work item w0".into()),
            pattern: None,
            response: "alpha payload zero.".into(),
        },
        RuleParams {
            substring: Some("work item w1".into()),
            pattern: None,
            response: "beta payload one.".into(),
        },
        RuleParams {
            substring: Some(String::new()),
            pattern: None,
            response: "alpha closing payload.".into(),
        },
    ];
    MachineDefinition {
        name: format!("random-{seed}"),
        bindings: vec![OracleBinding::new("default", Modality::Language, "default")],
        backends: BTreeMap::from([(
            "default".to_string(),
            BackendConfig::Scripted(ScriptedParams { rules }),
        )]),
        controller: ControllerSpec::new("random-dag")
            .with_param("seed", serde_json::json!(seed)),
        limits: RunLimits::new(64, 64, 1000),
    }
}

#[test]
fn criterion_6_randomized_machines_are_deterministic_and_replayable() {
    let mut runtime = Runtime::with_builtins();
    runtime.controllers.register("random-dag", |params| {
        let seed = params
            .get("seed")
            .and_then(serde_json::Value::as_u64)
            .unwrap_or(0);
        Ok(Box::new(RandomDagController { seed }))
    });

    let truth = GroundTruth::empty();
    let task = TaskSpec::new("randomized determinism check");
    for seed in 0..100u64 {
        let machine = random_machine(seed);
        let first = runtime
            .run(&machine, &truth, &task, seed)
            .unwrap_or_else(|e| panic!("machine {seed} failed: {e}"));
        let second = runtime.run(&machine, &truth, &task, seed).unwrap();
        assert_eq!(
            first.transcript.to_jsonl(),
            second.transcript.to_jsonl(),
            "machine {seed} not byte-deterministic"
        );

        let replayed = runtime
            .replay(&first.transcript, &machine, &truth, &task, seed)
            .unwrap_or_else(|e| panic!("machine {seed} replay failed: {e}"));
        assert_eq!(replayed.to_jsonl(), first.transcript.to_jsonl());

        first.transcript.verify_invariants().unwrap();
        first.transcript.verify_dag_ordering().unwrap();
    }
    println!(
        "acceptance criterion 6 (determinism and replay): PASS — 100 randomized machines, byte-identical reruns and replays"
    );
}

#[test]
fn criterion_7_summary_control_property_on_twenty_fixtures() {
    let bodies = fixture_articles(20, 7_000);
    let topic = "solar energy storage";
    let runtime = Runtime::with_builtins();

    for (i, body) in bodies.iter().enumerate() {
        // Every fixture opens with an on-topic anchor sentence so the
        // planted duplicate is of a relevant, retained sentence.
        let body = format!("Solar panels store excess energy for later. {body}");
        let doc = aiom::core::Document::new(
            format!("fixture-{i}"),
            format!("Fixture {i}"),
            body.clone(),
        );
        let sentences = score_all(segment_sentences(&doc), topic);
        let spec = SummarySpec::new(topic, 40).unwrap();
        let ranked = rank_diverse(&sentences, &spec).unwrap();
        let selected = select_budget(&ranked, &spec);

        // Scripted oracle answer: the selected sentences, with the most
        // topic-relevant one planted a second time at the end.
        let planted = selected
            .iter()
            .max_by(|a, b| {
                a.relevance
                    .partial_cmp(&b.relevance)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap()
            .text
            .clone();
        let mut answer_sentences: Vec<String> =
            selected.iter().map(|s| s.text.clone()).collect();
        answer_sentences.push(planted.clone());
        let response = answer_sentences.join(" ");

        let machine = MachineDefinition {
            name: format!("summarize-{i}"),
            bindings: vec![OracleBinding::new(
                "summarizer-llm",
                Modality::Language,
                "summarizer-llm",
            )],
            backends: BTreeMap::from([(
                "summarizer-llm".to_string(),
                BackendConfig::Scripted(ScriptedParams {
                    rules: vec![RuleParams {
                        substring: Some(String::new()),
                        pattern: None,
                        response,
                    }],
                }),
            )]),
            controller: ControllerSpec::new("summarizer")
                .with_param("topic", serde_json::json!(topic))
                .with_param("budget_words", serde_json::json!(40)),
            limits: RunLimits::default(),
        };
        let truth = GroundTruth::new(vec![doc.clone()]).unwrap();
        let output = runtime
            .run(&machine, &truth, &TaskSpec::new("summarize"), i as u64)
            .unwrap();

        // Control property: every context excerpt in the rendered prompt
        // is a verbatim article sentence (or the document title).
        let article_sentences: Vec<String> =
            segment_sentences(&doc).into_iter().map(|s| s.text).collect();
        let prompt_event = output
            .transcript
            .events
            .iter()
            .find(|e| e.kind == EventKind::PromptRendered)
            .unwrap();
        let rendered = prompt_event.payload["rendered_text"].as_str().unwrap();
        let task_event = output
            .transcript
            .events
            .iter()
            .find(|e| e.kind == EventKind::TaskCreated)
            .unwrap();
        for excerpt in task_event.payload["context_excerpts"].as_array().unwrap() {
            let text = excerpt["text"].as_str().unwrap();
            assert!(
                article_sentences.iter().any(|s| s == text) || text == doc.title,
                "fixture {i}: excerpt not verbatim: {text}"
            );
            assert!(rendered.contains(text), "fixture {i}: excerpt missing from prompt");
        }

        // The planted duplicate is pruned from the validated spans.
        let validated = output
            .transcript
            .events
            .iter()
            .find(|e| e.kind == EventKind::Validated)
            .unwrap();
        let spans: Vec<String> = validated.payload["extracted_spans"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        let occurrences = spans.iter().filter(|s| **s == planted).count();
        assert_eq!(occurrences, 1, "fixture {i}: duplicate not pruned");
        let diagnostics = validated.payload["diagnostics"].as_array().unwrap();
        assert!(
            diagnostics
                .iter()
                .any(|d| d.as_str().unwrap().starts_with("pruned redundant")),
            "fixture {i}: no redundancy diagnostic"
        );
    }
    println!(
        "acceptance criterion 7 (summary control property): PASS — 20/20 fixtures verbatim and duplicate-pruned"
    );
}

#[test]
fn criterion_8_file_formats_parse_and_emit_bit_exactly() {
    let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");

    let machine_bytes = std::fs::read_to_string(dir.join("machine.json")).unwrap();
    let config = aiom::config::parse_config(&machine_bytes).unwrap();
    assert_eq!(config.emit() + "\n", machine_bytes);

    let corpus_bytes = std::fs::read_to_string(dir.join("corpus.jsonl")).unwrap();
    let corpus = aiom::ara::corpus_from_jsonl(&corpus_bytes).unwrap();
    assert_eq!(aiom::ara::corpus_to_jsonl(&corpus), corpus_bytes);

    let partition_bytes = std::fs::read_to_string(dir.join("partition.json")).unwrap();
    let partition: aiom::ara::GenrePartition =
        serde_json::from_str(&partition_bytes).unwrap();
    let mut emitted = serde_json::to_string_pretty(&partition).unwrap();
    emitted.push('\n');
    assert_eq!(emitted, partition_bytes);

    let transcript_bytes = std::fs::read_to_string(dir.join("transcript.jsonl")).unwrap();
    let transcript = Transcript::from_jsonl(&transcript_bytes).unwrap();
    assert_eq!(transcript.to_jsonl(), transcript_bytes);

    println!(
        "acceptance criterion 8 (config/trace conformance): PASS — four golden formats re-emit bit-exactly"
    );
}

#[test]
fn summary_validator_prunes_duplicates_standalone() {
    // Direct check that the validator itself (not just the machine path)
    // prunes a planted duplicate.
    let params = BTreeMap::from([
        ("topic".to_string(), serde_json::json!("solar energy")),
        (
            "key_term_clusters".to_string(),
            serde_json::json!([["solar"]]),
        ),
    ]);
    let answer = aiom::core::Answer::new(
        "summary",
        "Solar output doubled. Solar output doubled.",
        "fixture",
    );
    let outcome = validate_summary(&answer, &params).unwrap();
    assert_eq!(outcome.extracted_spans.len(), 1);
}
