//! `kgav`: validate and filter KGQA answer candidates.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kgav::VerbalizationMode;
use serde_json::{json, Value};

use commands::{ReportFormat, Secrets};
use config::{Backend, RunConfig, ScorerKind};
use error::CliError;

#[derive(Parser)]
#[command(name = "kgav", version, about = "Answer validation for KGQA candidate lists")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// JSON run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long = "out", global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Records file (JSON array or JSON-lines).
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Mock knowledge graph file.
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Labeled pairs file (JSON-lines).
    #[arg(long, global = true)]
    pairs: Option<PathBuf>,
    /// Verbalization mode (repeatable): nlg or bag-of-labels.
    #[arg(long = "mode", global = true)]
    modes: Vec<VerbalizationMode>,
    /// Only the first N questions of the dataset.
    #[arg(long, global = true)]
    limit: Option<usize>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Bearer token for the remote KGQA and SPARQL endpoints.
    #[arg(long, global = true, env = "KGAV_ENDPOINT_TOKEN", hide_env_values = true)]
    token: Option<String>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Args)]
struct KgqaArgs {
    /// KGQA backend.
    #[arg(long)]
    backend: Option<Backend>,
    /// KGQA API URL (remote backend).
    #[arg(long)]
    endpoint: Option<String>,
    /// Knowledge base name sent to the KGQA API.
    #[arg(long)]
    kb: Option<String>,
    #[arg(long)]
    lang: Option<String>,
}

#[derive(Args)]
struct ScorerArgs {
    #[arg(long)]
    scorer: Option<ScorerKind>,
    /// Baseline model file, or MODE=FILE for one verbalization mode
    /// (repeatable).
    #[arg(long = "model")]
    models: Vec<String>,
    /// Remote classifier base URL.
    #[arg(long)]
    scorer_url: Option<String>,
    #[arg(long)]
    model_id: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a records file.
    Ingest,
    /// Build labeled pairs by negative sampling and split them.
    Sample {
        /// Incorrect pairs per correct pair.
        #[arg(long)]
        ratio: Option<usize>,
        /// Fraction of pairs in the training split.
        #[arg(long)]
        split: Option<f64>,
        /// Keep each question's pairs on one side of the split.
        #[arg(long)]
        group_by_question: bool,
    },
    /// Train the built-in baseline classifier.
    Train {
        /// Where to write the model.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
    },
    /// Precision, recall and F1 of a classifier.
    EvalClassifier {
        /// Seeds for the repeated baseline evaluation.
        #[arg(long)]
        runs: Option<usize>,
        /// Also emit a precision/recall table over thresholds.
        #[arg(long)]
        sweep: bool,
        #[command(flatten)]
        scorer: ScorerArgs,
    },
    /// Fetch candidate queries from a KGQA system.
    Ask {
        #[command(flatten)]
        kgqa: KgqaArgs,
        /// Question to ask (repeatable); defaults to the dataset questions.
        #[arg(long = "question")]
        questions: Vec<String>,
    },
    /// Run the full filtering pipeline and write quality reports.
    Filter {
        #[command(flatten)]
        kgqa: KgqaArgs,
        #[command(flatten)]
        scorer: ScorerArgs,
        /// SPARQL backend.
        #[arg(long)]
        sparql_backend: Option<Backend>,
        #[arg(long)]
        sparql_endpoint: Option<String>,
        /// Drop candidates with aggregates instead of executing them
        /// stripped.
        #[arg(long)]
        drop_stripped: bool,
        /// Cutoff for P@k and NDCG@k (repeatable).
        #[arg(long = "k")]
        k_values: Vec<usize>,
    },
    /// Re-render a filter report.
    Report {
        /// report.json written by `filter`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "markdown")]
        format: ReportFormat,
    },
    /// Generate a synthetic graph and gold records.
    Synth {
        #[arg(long)]
        persons: Option<usize>,
    },
}

type Overrides = Vec<(&'static str, Value)>;

fn set<T: serde::Serialize>(o: &mut Overrides, path: &'static str, value: Option<T>) {
    if let Some(v) = value {
        o.push((path, json!(v)));
    }
}

fn global_overrides(g: &GlobalArgs) -> Overrides {
    let mut o = Overrides::new();
    set(&mut o, "seed", g.seed);
    set(&mut o, "workers", g.workers);
    set(&mut o, "paths.out_dir", g.out_dir.as_ref());
    set(&mut o, "paths.cache_dir", g.cache_dir.as_ref());
    set(&mut o, "paths.dataset", g.dataset.as_ref());
    set(&mut o, "paths.graph", g.graph.as_ref());
    set(&mut o, "paths.pairs", g.pairs.as_ref());
    set(&mut o, "evaluation.limit", g.limit);
    set(&mut o, "evaluation.threshold", g.threshold);
    if !g.modes.is_empty() {
        o.push(("modes", json!(g.modes)));
    }
    o
}

fn kgqa_overrides(o: &mut Overrides, k: &KgqaArgs) {
    set(o, "kgqa.backend", k.backend);
    set(o, "kgqa.endpoint", k.endpoint.as_ref());
    set(o, "kgqa.kb", k.kb.as_ref());
    set(o, "kgqa.lang", k.lang.as_ref());
}

fn scorer_overrides(o: &mut Overrides, s: &ScorerArgs) -> Result<(), CliError> {
    set(o, "scorer.kind", s.scorer);
    set(o, "scorer.url", s.scorer_url.as_ref());
    set(o, "scorer.model_id", s.model_id.as_ref());
    let mut per_mode = serde_json::Map::new();
    for m in &s.models {
        match m.split_once('=') {
            Some((mode, path)) => {
                let mode: VerbalizationMode = mode.parse().map_err(CliError::Config)?;
                per_mode.insert(mode.name().to_string(), json!(path));
            }
            None => o.push(("paths.model", json!(m))),
        }
    }
    if !per_mode.is_empty() {
        o.push(("scorer.models", Value::Object(per_mode)));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut o = global_overrides(&cli.global);
    match &cli.command {
        Command::Ingest | Command::Report { .. } => {}
        Command::Sample {
            ratio,
            split,
            group_by_question,
        } => {
            set(&mut o, "sampling.negatives_per_positive", *ratio);
            set(&mut o, "sampling.split_ratio", *split);
            if *group_by_question {
                o.push(("sampling.group_by_question", json!(true)));
            }
        }
        Command::Train {
            model,
            epochs,
            learning_rate,
        } => {
            set(&mut o, "paths.model", model.as_ref());
            set(&mut o, "training.epochs", *epochs);
            set(&mut o, "training.learning_rate", *learning_rate);
        }
        Command::EvalClassifier { runs, sweep, scorer } => {
            set(&mut o, "evaluation.runs", *runs);
            if *sweep {
                o.push(("evaluation.sweep", json!(true)));
            }
            scorer_overrides(&mut o, scorer)?;
        }
        Command::Ask { kgqa, .. } => kgqa_overrides(&mut o, kgqa),
        Command::Filter {
            kgqa,
            scorer,
            sparql_backend,
            sparql_endpoint,
            drop_stripped,
            k_values,
        } => {
            kgqa_overrides(&mut o, kgqa);
            scorer_overrides(&mut o, scorer)?;
            set(&mut o, "sparql.backend", *sparql_backend);
            set(&mut o, "sparql.endpoint", sparql_endpoint.as_ref());
            if *drop_stripped {
                o.push(("drop_stripped", json!(true)));
            }
            if !k_values.is_empty() {
                o.push(("evaluation.k_values", json!(k_values)));
            }
        }
        Command::Synth { persons } => set(&mut o, "synthetic.persons", *persons),
    }

    if let Command::Report { input, format } = &cli.command {
        return commands::report(input, *format);
    }

    let cfg = RunConfig::resolve(cli.global.config.as_deref(), o)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build_global()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let secrets = Secrets {
        endpoint_token: cli.global.token.clone(),
    };
    match &cli.command {
        Command::Ingest => commands::ingest(&cfg),
        Command::Sample { .. } => commands::sample(&cfg),
        Command::Train { .. } => commands::train(&cfg),
        Command::EvalClassifier { .. } => commands::eval_classifier(&cfg),
        Command::Ask { questions, .. } => commands::ask(&cfg, &secrets, questions),
        Command::Filter { .. } => commands::filter(&cfg, &secrets),
        Command::Synth { .. } => commands::synth(&cfg),
        Command::Report { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
