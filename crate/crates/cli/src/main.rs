use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use parenting::analysis::{cluster_lengths, conditioned_scores, length_stats, render_table};
use parenting::corpus::{load_candidates, load_dataset, save_candidates, Instance};
use parenting::datagen::{generate_dataset, write_dataset, DivergenceConfig};
use parenting::metric::corpus_parent;
use parenting::neural::{load_checkpoint, save_checkpoint};
use parenting::trainer::{greedy_corpus, run_phase, sampled_corpus, train_mle, write_log, Phase, TrainConfig};

const MANIFEST: &str = "manifest.json";

#[derive(Parser)]
#[command(name = "parenting", version, about = "PARENT scoring and PARENT-reward fine-tuning for data-to-text")]
struct Cli {
    /// Cap on worker threads (defaults to all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with controlled divergence.
    MakeData(MakeDataArgs),
    /// Pretrain with maximum likelihood or fine-tune with the mixed objective.
    Train(TrainArgs),
    /// Decode a dataset with a trained checkpoint.
    Generate(GenerateArgs),
    /// Score candidates with PARENT and BLEU.
    Score(ScoreArgs),
    /// Compare two systems' outputs by length and length cluster.
    Analyze(AnalyzeArgs),
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

#[derive(Args)]
struct MakeDataArgs {
    #[arg(long, default_value = "biography")]
    schema: String,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(10..))]
    count: u64,
    #[arg(long, default_value_t = 0.3, value_parser = unit_interval)]
    hallucination: f64,
    #[arg(long, default_value_t = 0.1, value_parser = unit_interval)]
    omission: f64,
    #[arg(long, default_value_t = 13)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PhaseArg {
    Mle,
    Rl,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    phase: PhaseArg,
    /// Directory holding train.jsonl and dev.jsonl.
    #[arg(long)]
    data: PathBuf,
    /// Starting checkpoint; required for the rl phase, continues training for mle.
    #[arg(long, required_if_eq("phase", "rl"))]
    checkpoint: Option<PathBuf>,
    /// TOML file with trainer settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = unit_interval)]
    gamma: Option<f64>,
    #[arg(long, value_parser = unit_interval)]
    lambda_train: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Epochs for the selected phase.
    #[arg(long)]
    epochs: Option<usize>,
    /// Learning rate for the selected phase.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    batch_size: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_len: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Greedy,
    Sample,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    mode: Mode,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u64).range(1..))]
    max_len: u64,
    /// Output file, one whitespace-joined candidate per line.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    lambda: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    lambda: f64,
    /// Short/long boundary in tokens; clustered from reference lengths when absent.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

/// Bad input the user can fix by changing flags or config (exit code 2).
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    config: Value,
    seed: Option<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    tool_version: &'static str,
    duration_seconds: f64,
}

fn display(paths: &[&Path]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial manifest.
fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    let text = serde_json::to_string_pretty(manifest)? + "\n";
    fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn make_data(args: MakeDataArgs, start: Instant) -> Result<()> {
    let config = DivergenceConfig {
        hallucination_rate: args.hallucination,
        omission_rate: args.omission,
        schema: args.schema,
        count: args.count as usize,
        seed: args.seed,
    };
    config.validate().map_err(|e| UsageError(e.to_string()))?;
    let dataset = generate_dataset(&config)?;
    create_dir(&args.out)?;
    let written = write_dataset(&dataset, &args.out)?;
    println!(
        "wrote {} train, {} dev, {} test instances to {}",
        dataset.train.instances.len(),
        dataset.dev.instances.len(),
        dataset.test.instances.len(),
        args.out.display()
    );
    write_manifest(
        &args.out.join(MANIFEST),
        &Manifest {
            command: "make-data",
            config: serde_json::to_value(&config)?,
            seed: Some(config.seed),
            inputs: Vec::new(),
            outputs: written.iter().map(|p| p.display().to_string()).collect(),
            tool_version: env!("CARGO_PKG_VERSION"),
            duration_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

fn resolve_train_config(args: &TrainArgs) -> Result<TrainConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?
        }
        None => TrainConfig::default(),
    };
    if let Some(g) = args.gamma {
        config.gamma = g;
    }
    if let Some(l) = args.lambda_train {
        config.lambda_train = l;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(b) = args.batch_size {
        config.batch_size = b as usize;
    }
    if let Some(m) = args.max_len {
        config.max_len = m as usize;
    }
    match args.phase {
        PhaseArg::Mle => {
            config.epochs_mle = args.epochs.unwrap_or(config.epochs_mle);
            config.lr_mle = args.lr.unwrap_or(config.lr_mle);
        }
        PhaseArg::Rl => {
            config.epochs_rl = args.epochs.unwrap_or(config.epochs_rl);
            config.lr_rl = args.lr.unwrap_or(config.lr_rl);
        }
    }
    config.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(config)
}

fn train(args: TrainArgs, start: Instant) -> Result<()> {
    let config = resolve_train_config(&args)?;
    let train_path = args.data.join("train.jsonl");
    let dev_path = args.data.join("dev.jsonl");
    let train = load_dataset(&train_path)?;
    let dev = load_dataset(&dev_path)?;
    let outcome = match (args.phase, &args.checkpoint) {
        (PhaseArg::Mle, None) => train_mle(&train, &dev, &config)?,
        (phase, Some(path)) => {
            let model = load_checkpoint(path)?;
            let phase = if phase == PhaseArg::Mle { Phase::Mle } else { Phase::Rl };
            run_phase(model, &train, &dev, &config, phase)?
        }
        (PhaseArg::Rl, None) => unreachable!("clap requires --checkpoint for rl"),
    };
    create_dir(&args.out)?;
    let checkpoint = args.out.join("checkpoint.json");
    let log = args.out.join("train_log.jsonl");
    save_checkpoint(&outcome.model, &checkpoint)?;
    write_log(&outcome.log, &log)?;
    match (outcome.best_epoch, outcome.best_score) {
        (Some(epoch), Some(score)) => println!("selected epoch {epoch} (dev PARENT-F {score:.4})"),
        _ => println!("no epochs run; checkpoint unchanged"),
    }
    let mut inputs = vec![train_path.as_path(), dev_path.as_path()];
    if let Some(c) = &args.checkpoint {
        inputs.push(c);
    }
    write_manifest(
        &args.out.join(MANIFEST),
        &Manifest {
            command: "train",
            config: json!({ "phase": args.phase, "trainer": config }),
            seed: Some(config.seed),
            inputs: display(&inputs),
            outputs: display(&[&checkpoint, &log]),
            tool_version: env!("CARGO_PKG_VERSION"),
            duration_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

fn sibling_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn generate(args: GenerateArgs, start: Instant) -> Result<()> {
    let model = load_checkpoint(&args.checkpoint)?;
    let data = load_dataset(&args.data)?;
    let max_len = args.max_len as usize;
    let outputs = match args.mode {
        Mode::Greedy => greedy_corpus(&model, &data, max_len)?,
        Mode::Sample => sampled_corpus(&model, &data, max_len, args.seed)?,
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    save_candidates(&outputs, &args.out)?;
    println!("wrote {} candidates to {}", outputs.len(), args.out.display());
    write_manifest(
        &sibling_manifest(&args.out),
        &Manifest {
            command: "generate",
            config: json!({ "mode": args.mode, "max_len": max_len }),
            seed: Some(args.seed),
            inputs: display(&[&args.checkpoint, &args.data]),
            outputs: display(&[&args.out]),
            tool_version: env!("CARGO_PKG_VERSION"),
            duration_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

fn score_rows(label: &str, s: &parenting::metric::ParentScore) -> Vec<String> {
    vec![
        label.to_owned(),
        format!("{:.4}", s.precision),
        format!("{:.4}", s.recall_reference),
        format!("{:.4}", s.coverage_table),
        format!("{:.4}", s.recall),
        format!("{:.4}", s.f_score),
    ]
}

fn score(args: ScoreArgs, start: Instant) -> Result<()> {
    let data = load_dataset(&args.data)?;
    let candidates = load_candidates(&args.candidates)?;
    let report = corpus_parent(&candidates, &data, args.lambda)?;
    create_dir(&args.out)?;
    let json_path = args.out.join("score.json");
    let text_path = args.out.join("score.txt");
    write_text(&json_path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    let table = render_table(
        &["system", "precision", "recall_reference", "coverage_table", "recall", "f_score"],
        &[score_rows("candidates", &report.mean)],
    ) + &format!("BLEU {:.2}  (lambda {}, {} instances)\n", report.bleu, args.lambda, report.count);
    write_text(&text_path, &table)?;
    print!("{table}");
    write_manifest(
        &args.out.join(MANIFEST),
        &Manifest {
            command: "score",
            config: json!({ "lambda": args.lambda }),
            seed: None,
            inputs: display(&[&args.data, &args.candidates]),
            outputs: display(&[&json_path, &text_path]),
            tool_version: env!("CARGO_PKG_VERSION"),
            duration_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

fn reference_threshold(data: &[Instance]) -> Option<f64> {
    let lengths: Vec<usize> = data.iter().map(|i| i.primary_reference().len()).collect();
    cluster_lengths(&lengths, 2).ok()
}

fn analyze(args: AnalyzeArgs, start: Instant) -> Result<()> {
    let data = load_dataset(&args.data)?;
    let a = load_candidates(&args.a)?;
    let b = load_candidates(&args.b)?;
    let lengths = length_stats(&a, &b, &data, args.lambda)?;
    let threshold = match args.threshold {
        Some(t) if t > 0.0 => Some(t),
        Some(t) => return Err(UsageError(format!("--threshold must be positive, got {t}")).into()),
        None => reference_threshold(&data),
    };
    let mut text = format!("length statistics (B minus A, lambda {})\n", args.lambda);
    text += &lengths.to_table();
    let conditioned = match threshold {
        Some(t) => {
            let ca = conditioned_scores(&a, &data, t, args.lambda)?;
            let cb = conditioned_scores(&b, &data, t, args.lambda)?;
            text += &format!("\nsystem A by output length\n{}", ca.to_table());
            text += &format!("\nsystem B by output length\n{}", cb.to_table());
            json!({ "a": ca, "b": cb })
        }
        None => {
            text += "\nreference lengths do not form two clusters; conditioned scores skipped\n";
            Value::Null
        }
    };
    let report = json!({ "lengths": lengths, "threshold": threshold, "conditioned": conditioned });
    create_dir(&args.out)?;
    let json_path = args.out.join("analysis.json");
    let text_path = args.out.join("analysis.txt");
    write_text(&json_path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    write_text(&text_path, &text)?;
    print!("{text}");
    write_manifest(
        &args.out.join(MANIFEST),
        &Manifest {
            command: "analyze",
            config: json!({ "lambda": args.lambda, "threshold": threshold }),
            seed: None,
            inputs: display(&[&args.data, &args.a, &args.b]),
            outputs: display(&[&json_path, &text_path]),
            tool_version: env!("CARGO_PKG_VERSION"),
            duration_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let start = Instant::now();
    match cli.command {
        Command::MakeData(args) => make_data(args, start),
        Command::Train(args) => train(args, start),
        Command::Generate(args) => generate(args, start),
        Command::Score(args) => score(args, start),
        Command::Analyze(args) => analyze(args, start),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
