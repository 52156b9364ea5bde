use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mwp_core::corpus::annotator::split_sentences;
use mwp_core::corpus::{
    load_dataset, micro_corpus, noisy_dataset, read_annotation, Dataset, MWProblem, NoiseKind,
};
use mwp_core::learn::{train, Models};
use mwp_core::metrics::{dataset_template_stats, evaluate, expected_accuracy, perplexity};
use mwp_core::number::Value;
use mwp_core::pipeline::Pipeline;

mod config;

use config::Config;

#[derive(Parser)]
#[command(
    name = "mwp",
    version,
    about = "Meaning-based solver for math word problems",
    arg_required_else_help = true
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem and print the answer.
    Solve(SolveArgs),
    /// Solve a problem and print the logic-form trace.
    Explain(SolveArgs),
    /// Fit models from gold answers by weak supervision.
    Train {
        /// Dataset (JSON lines); defaults to the bundled micro-corpus.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Output model directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate models on a dataset.
    Eval {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        models: Option<PathBuf>,
        /// Also write the report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Evaluate the noisy variants of the dataset as well.
        #[arg(long)]
        noisy: bool,
    },
    /// Dataset difficulty under a template-prior random guesser.
    Perplexity {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Write noisy variants of a dataset.
    Noisify {
        /// new-subject, new-entity or new-modifier; repeatable, all by default.
        #[arg(long = "kind")]
        kinds: Vec<NoiseKind>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Whole problem; the last sentence is the question.
    #[arg(long, conflicts_with = "file")]
    text: Option<String>,
    /// Dataset file; every problem is solved.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Annotation file (CoNLL layout) used instead of the built-in annotator.
    #[arg(long)]
    annotation: Option<PathBuf>,
    #[arg(long)]
    models: Option<PathBuf>,
    #[arg(long)]
    explain: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dataset(path: Option<&Path>) -> Result<Dataset> {
    match path {
        Some(p) => Ok(load_dataset(p)?),
        None => Ok(micro_corpus()),
    }
}

/// Loads models from `--models`, the config, or trains on the micro-corpus.
fn models(cfg: &Config, explicit: Option<&Path>, pipeline: &Pipeline) -> Result<Models> {
    match explicit.or(cfg.models.as_deref()) {
        Some(dir) => {
            Models::load(dir).with_context(|| format!("loading models from {}", dir.display()))
        }
        None => Ok(train(&micro_corpus(), pipeline, &cfg.train)?.0),
    }
}

fn problem_from_text(text: &str) -> Result<MWProblem> {
    let mut sentences = split_sentences(text);
    let Some(question) = sentences.pop() else {
        bail!("empty problem text");
    };
    if !question.trim_end().ends_with('?') {
        bail!("the last sentence must be the question");
    }
    let p = MWProblem::new("input", &sentences.join(" "), &question, Value::zero());
    p.validate().map_err(anyhow::Error::msg)?;
    Ok(p)
}

fn solve(
    cfg: &Config,
    args: SolveArgs,
    explain: bool,
    out: &mut impl std::io::Write,
) -> Result<()> {
    let pipeline = cfg.pipeline()?;
    let models = models(cfg, args.models.as_deref(), &pipeline)?;
    let mut problems = match (&args.text, &args.file) {
        (Some(t), _) => vec![problem_from_text(t)?],
        (None, Some(f)) => load_dataset(f)?.problems,
        (None, None) => bail!("give the problem with --text or --file"),
    };
    if let Some(a) = &args.annotation {
        if problems.len() != 1 {
            bail!("--annotation needs exactly one problem");
        }
        problems[0].annotation = Some(read_annotation(a)?);
    }
    let many = problems.len() > 1;
    for p in &problems {
        let s = pipeline
            .solve(p, &models)
            .map_err(|e| anyhow::anyhow!("{}: {} failed: {e}", p.id, e.stage()))?;
        if explain {
            if many {
                writeln!(out, "% problem {}", p.id)?;
            }
            write!(out, "{}", s.explain())?;
        } else if many {
            writeln!(out, "{} {}", p.id, s.answer)?;
        } else {
            writeln!(out, "{}", s.answer)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Solve(args) => {
            let explain = args.explain;
            solve(&cfg, args, explain, &mut out)?;
        }
        Command::Explain(args) => solve(&cfg, args, true, &mut out)?,
        Command::Train { data, out: dir } => {
            let pipeline = cfg.pipeline()?;
            let (models, report) = train(&dataset(data.as_deref())?, &pipeline, &cfg.train)?;
            models.save(&dir)?;
            write!(out, "{report}")?;
            writeln!(out, "models written to {}", dir.display())?;
        }
        Command::Eval {
            data,
            models: dir,
            report,
            noisy,
        } => {
            let pipeline = cfg.pipeline()?;
            let models = models(&cfg, dir.as_deref(), &pipeline)?;
            let d = dataset(data.as_deref())?;
            let mut text = evaluate(&d, &models, &pipeline).to_string();
            if noisy {
                let nd = noisy_dataset(&d, &NoiseKind::ALL, cfg.seed, &pipeline.lexicon)?;
                let r = evaluate(&nd, &models, &pipeline);
                text.push('\n');
                text.push_str(&r.to_string());
                let kinds: Vec<&str> = NoiseKind::ALL.iter().map(|k| k.as_str()).collect();
                for (k, (c, n)) in r.per_suffix(&kinds) {
                    text.push_str(&format!(
                        "accuracy.{k}={:.3} ({c}/{n})\n",
                        c as f64 / n as f64
                    ));
                }
            }
            if let Some(p) = report {
                std::fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?;
            }
            write!(out, "{text}")?;
        }
        Command::Perplexity { data } => {
            let pipeline = cfg.pipeline()?;
            let d = dataset(data.as_deref())?;
            let (stats, report) = dataset_template_stats(&d, &pipeline);
            for s in &stats {
                writeln!(
                    out,
                    "{:<16} {:<16} n={} p={:.4} A={:.6}",
                    s.id,
                    s.template(),
                    s.n,
                    s.prior,
                    expected_accuracy(s)?
                )?;
            }
            for (id, why) in &report.unlabelable {
                writeln!(out, "skipped {id}: {why}")?;
            }
            let pp = perplexity(&stats)?;
            writeln!(out, "problems={}", stats.len())?;
            writeln!(out, "A={:.6}", 1.0 / pp)?;
            writeln!(out, "PP={pp:.2}")?;
        }
        Command::Noisify {
            kinds,
            seed,
            input,
            out: path,
        } => {
            let pipeline = cfg.pipeline()?;
            let kinds = if kinds.is_empty() {
                NoiseKind::ALL.to_vec()
            } else {
                kinds
            };
            let d = load_dataset(&input)?;
            let nd = noisy_dataset(&d, &kinds, seed.unwrap_or(cfg.seed), &pipeline.lexicon)?;
            std::fs::write(&path, nd.to_jsonl())
                .with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "{} variants written to {}", nd.len(), path.display())?;
        }
    }
    Ok(())
}
