//! Subcommand implementations. Each run writes its transcript under the
//! output directory regardless of how the run ends.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;

use aiom::ara::{
    self, corpus_from_jsonl, machine_truth, GenrePartition, LabeledArticle, ReferenceSets,
    SearchTrace, DEFAULT_REFERENCES_PER_GRADE, DEFAULT_THETA,
};
use aiom::config::{load_config, ConfigError, MachineConfig};
use aiom::core::{Document, GroundTruth, TaskSpec};
use aiom::runtime::{ControllerSpec, RunFailure, Runtime, RuntimeError, Transcript};
use aiom::sim::{
    generate_corpus, per_trial_csv, run_trials, sweep_slopes, CorpusSpec, NoiseSpec, SearchConfig,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(String),
    Backend(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Run(m) | CliError::Backend(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn classify_failure(failure: RunFailure) -> CliError {
    match &failure.error {
        RuntimeError::Backend { .. } => CliError::Backend(failure.error.to_string()),
        _ => CliError::Run(failure.error.to_string()),
    }
}

#[derive(Parser)]
#[command(
    name = "aiom",
    version,
    about = "Run oracle machines: iterative query, answer, and validation cycles over pluggable AI backends"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct CommonArgs {
    /// Machine configuration file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for transcript and report files.
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Verbose progress on stderr.
    #[arg(short, long)]
    pub verbose: bool,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run a machine from its config file.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Task statement; falls back to the config's embedded input.
        #[arg(long)]
        task: Option<String>,
        /// Input document files (plain text; the id is the file stem).
        #[arg(long)]
        input: Vec<PathBuf>,
    },
    /// Summarize a topic within an article.
    Summarize {
        #[command(flatten)]
        common: CommonArgs,
        /// Article file (plain text).
        #[arg(long)]
        article: PathBuf,
        /// Topic to summarize.
        #[arg(long)]
        topic: String,
        /// Summary length budget in words.
        #[arg(long, default_value_t = 50)]
        budget: u64,
        /// Relevance/diversity trade-off in [0, 1].
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Assess the readability grade of an article by local search.
    Ara {
        #[command(flatten)]
        common: CommonArgs,
        /// Article file: a labeled-article JSON object or plain text.
        #[arg(long)]
        article: PathBuf,
        /// Genre partition file (JSON).
        #[arg(long)]
        partition: PathBuf,
        /// Training corpus (JSON Lines) to sample reference sets from.
        #[arg(long)]
        refs: PathBuf,
        /// Direction threshold in (0, 1).
        #[arg(long, default_value_t = DEFAULT_THETA)]
        theta: f64,
        /// References per grade.
        #[arg(long, default_value_t = DEFAULT_REFERENCES_PER_GRADE)]
        k: usize,
    },
    /// Monte Carlo accuracy simulation on a synthetic corpus.
    Simulate {
        /// Corpus spec file (JSON); alternatively use --articles/--genres/--sigma.
        #[arg(long)]
        corpus_spec: Option<PathBuf>,
        #[arg(long, default_value_t = 1654)]
        articles: usize,
        #[arg(long, default_value_t = 33)]
        genres: usize,
        #[arg(long, default_value_t = 0.3)]
        sigma: f64,
        /// Noise spec file (JSON); alternatively use --assessor-accuracy/--slope.
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long)]
        assessor_accuracy: Option<f64>,
        #[arg(long)]
        slope: Option<f64>,
        #[arg(long, default_value_t = 50)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        output: PathBuf,
        /// Write per-trial counts to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Comma-separated comparator slopes to sweep (calibration aid).
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Re-execute a transcript and verify it is reproduced byte-for-byte.
    Replay {
        #[command(flatten)]
        common: CommonArgs,
        /// Transcript file (JSON Lines).
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        task: Option<String>,
        #[arg(long)]
        input: Vec<PathBuf>,
    },
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            common,
            task,
            input,
        } => cmd_run(common, task, input),
        Command::Summarize {
            common,
            article,
            topic,
            budget,
            lambda,
        } => cmd_summarize(common, article, topic, budget, lambda),
        Command::Ara {
            common,
            article,
            partition,
            refs,
            theta,
            k,
        } => cmd_ara(common, article, partition, refs, theta, k),
        Command::Simulate {
            corpus_spec,
            articles,
            genres,
            sigma,
            noise,
            assessor_accuracy,
            slope,
            trials,
            seed,
            output,
            csv,
            sweep,
        } => cmd_simulate(
            corpus_spec,
            articles,
            genres,
            sigma,
            noise,
            assessor_accuracy,
            slope,
            trials,
            seed,
            output,
            csv,
            sweep,
        ),
        Command::Replay {
            common,
            transcript,
            task,
            input,
        } => cmd_replay(common, transcript, task, input),
    }
}

fn document_from_file(path: &Path) -> Result<Document, CliError> {
    let body = fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("document")
        .to_string();
    Ok(Document::new(stem.clone(), stem, body))
}

fn resolve_inputs(
    config: &MachineConfig,
    task: Option<String>,
    input: &[PathBuf],
) -> Result<(GroundTruth, TaskSpec), CliError> {
    let truth = if input.is_empty() {
        config.input_truth()?
    } else {
        let docs = input
            .iter()
            .map(|p| document_from_file(p))
            .collect::<Result<Vec<_>, _>>()?;
        GroundTruth::new(docs).map_err(|e| CliError::Usage(e.to_string()))?
    };
    let task = task
        .map(TaskSpec::new)
        .or_else(|| config.input_task())
        .ok_or_else(|| {
            CliError::Usage("no task given: pass --task or embed one in the config".into())
        })?;
    Ok((truth, task))
}

fn write_transcript(output: &Path, transcript: &Transcript) -> Result<PathBuf, CliError> {
    fs::create_dir_all(output)?;
    let path = output.join("transcript.jsonl");
    fs::write(&path, transcript.to_jsonl())?;
    Ok(path)
}

/// Run the machine and write the transcript whether or not it succeeds.
fn execute(
    runtime: &Runtime,
    config: &MachineConfig,
    truth: &GroundTruth,
    task: &TaskSpec,
    common: &CommonArgs,
) -> Result<String, CliError> {
    let machine = config.to_definition();
    let seed = common.seed.unwrap_or(config.seed);
    if common.verbose {
        eprintln!("aiom: running machine `{}` with seed {seed}", machine.name);
    }
    match runtime.run(&machine, truth, task, seed) {
        Ok(output) => {
            let path = write_transcript(&common.output, &output.transcript)?;
            if common.verbose {
                eprintln!("aiom: transcript written to {}", path.display());
            }
            match output.final_answer {
                Some(answer) => Ok(answer),
                None => Err(CliError::Run(format!(
                    "run halted without a final answer: {}",
                    output.halt_diagnostic.unwrap_or_default()
                ))),
            }
        }
        Err(failure) => {
            let _ = write_transcript(&common.output, &failure.transcript);
            Err(classify_failure(failure))
        }
    }
}

fn cmd_run(common: CommonArgs, task: Option<String>, input: Vec<PathBuf>) -> Result<(), CliError> {
    let config = load_config(&common.config)?;
    let (truth, task) = resolve_inputs(&config, task, &input)?;
    let runtime = Runtime::with_builtins();
    let answer = execute(&runtime, &config, &truth, &task, &common)?;
    println!("{answer}");
    Ok(())
}

fn cmd_summarize(
    common: CommonArgs,
    article: PathBuf,
    topic: String,
    budget: u64,
    lambda: Option<f64>,
) -> Result<(), CliError> {
    let mut config = load_config(&common.config)?;
    let mut controller = ControllerSpec::new("summarizer")
        .with_param("topic", serde_json::json!(topic))
        .with_param("budget_words", serde_json::json!(budget));
    if let Some(lambda) = lambda {
        controller = controller.with_param("lambda", serde_json::json!(lambda));
    }
    config.controller = controller;

    let doc = document_from_file(&article)?;
    let truth = GroundTruth::new(vec![doc]).map_err(|e| CliError::Usage(e.to_string()))?;
    let task = TaskSpec::new(format!("Summarize the topic \"{topic}\""));
    let runtime = Runtime::with_builtins();
    let summary = execute(&runtime, &config, &truth, &task, &common)?;
    println!("{summary}");
    Ok(())
}

fn load_article(path: &Path) -> Result<Document, CliError> {
    let text = fs::read_to_string(path)?;
    let first_line = text.lines().next().unwrap_or_default();
    if first_line.trim_start().starts_with('{') {
        let article: LabeledArticle = serde_json::from_str(first_line)
            .map_err(|e| CliError::Usage(format!("labeled article parse error: {e}")))?;
        Ok(article.to_document())
    } else {
        document_from_file(path)
    }
}

fn cmd_ara(
    common: CommonArgs,
    article: PathBuf,
    partition: PathBuf,
    refs: PathBuf,
    theta: f64,
    k: usize,
) -> Result<(), CliError> {
    let mut config = load_config(&common.config)?;
    let doc = load_article(&article)?;
    let partition: GenrePartition = serde_json::from_str(&fs::read_to_string(&partition)?)
        .map_err(|e| CliError::Usage(format!("partition parse error: {e}")))?;
    let training = corpus_from_jsonl(&fs::read_to_string(&refs)?)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let seed = common.seed.unwrap_or(config.seed);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let refs = ReferenceSets::sample(&training, k, &mut rng)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    config.controller = ControllerSpec::new("ara")
        .with_param(
            "partition",
            serde_json::to_value(&partition).expect("partition serializes"),
        )
        .with_param("refs", serde_json::to_value(&refs).expect("refs serialize"))
        .with_param("theta", serde_json::json!(theta));

    let truth = machine_truth(&doc, &refs).map_err(|e| CliError::Usage(e.to_string()))?;
    let task = TaskSpec::new("Assess the readability grade level of the article");
    let runtime = Runtime::with_builtins();
    let answer = execute(&runtime, &config, &truth, &task, &common)?;

    let trace: SearchTrace = serde_json::from_str(&answer)
        .map_err(|e| CliError::Run(format!("machine returned malformed trace: {e}")))?;
    fs::create_dir_all(&common.output)?;
    fs::write(
        common.output.join("report.json"),
        serde_json::to_string_pretty(&trace).expect("trace serializes"),
    )?;
    println!("grade: {}", trace.final_grade);
    println!(
        "halt: {}",
        serde_json::to_value(trace.halt_reason)
            .expect("reason serializes")
            .as_str()
            .unwrap_or_default()
    );
    for (grade, mean) in &trace.visited {
        println!("visited grade {grade}: mean {mean:+.3}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    corpus_spec: Option<PathBuf>,
    articles: usize,
    genres: usize,
    sigma: f64,
    noise: Option<PathBuf>,
    assessor_accuracy: Option<f64>,
    slope: Option<f64>,
    trials: u32,
    seed: u64,
    output: PathBuf,
    csv: Option<PathBuf>,
    sweep: Option<String>,
) -> Result<(), CliError> {
    let spec = match corpus_spec {
        Some(path) => serde_json::from_str(&fs::read_to_string(&path)?)
            .map_err(|e| CliError::Usage(format!("corpus spec parse error: {e}")))?,
        None => CorpusSpec {
            n_genres: genres,
            sigma,
            ..CorpusSpec::new(articles, seed)
        },
    };
    let mut noise_spec: NoiseSpec = match noise {
        Some(path) => serde_json::from_str(&fs::read_to_string(&path)?)
            .map_err(|e| CliError::Usage(format!("noise spec parse error: {e}")))?,
        None => NoiseSpec::default(),
    };
    if let Some(p) = assessor_accuracy {
        noise_spec.assessor_accuracy = p;
    }
    if let Some(a) = slope {
        noise_spec.comparator_slope = a;
    }
    let search = SearchConfig::default();
    let corpus = generate_corpus(&spec).map_err(|e| CliError::Usage(e.to_string()))?;

    if let Some(sweep) = sweep {
        let slopes: Vec<f64> = sweep
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Usage(format!("bad --sweep value: {e}")))?;
        let rows = sweep_slopes(&corpus, &noise_spec, &search, &slopes, trials, seed)
            .map_err(|e| CliError::Run(e.to_string()))?;
        println!("slope   exact_match  baseline");
        for (slope, report) in rows {
            println!(
                "{slope:<8.3}{:<13.4}{:.4}",
                report.exact_match, report.baseline_exact_match
            );
        }
        return Ok(());
    }

    let result = run_trials(&corpus, &noise_spec, &search, trials, seed)
        .map_err(|e| CliError::Run(e.to_string()))?;
    fs::create_dir_all(&output)?;
    fs::write(output.join("report.json"), result.report.to_json())?;
    if let Some(csv_path) = csv {
        fs::write(csv_path, per_trial_csv(&result.per_trial))?;
    }
    print!("{}", result.report.to_table());
    Ok(())
}

fn cmd_replay(
    common: CommonArgs,
    transcript: PathBuf,
    task: Option<String>,
    input: Vec<PathBuf>,
) -> Result<(), CliError> {
    let config = load_config(&common.config)?;
    let (truth, task) = resolve_inputs(&config, task, &input)?;
    let text = fs::read_to_string(&transcript)?;
    let transcript =
        Transcript::from_jsonl(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    let seed = common.seed.unwrap_or(config.seed);
    let runtime = Runtime::with_builtins();
    let machine = config.to_definition();
    match runtime.replay(&transcript, &machine, &truth, &task, seed) {
        Ok(replayed) => {
            println!("replay ok: {} events reproduced byte-for-byte", replayed.len());
            Ok(())
        }
        Err(e) => Err(CliError::Run(e.to_string())),
    }
}

impl From<ara::AraError> for CliError {
    fn from(e: ara::AraError) -> Self {
        CliError::Run(e.to_string())
    }
}
