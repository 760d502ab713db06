//! Pairwise judge evaluation runner.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pairjudge_cli::commands::{
    build_judge, run_agreement, run_audit, run_cache_inspect, run_cache_verify, run_evaluate,
    run_sweep,
};
use pairjudge_cli::config::{self, BackendKind, Overrides, RunConfig};
use pairjudge_cli::dataset::{self, LoadedDataset};
use pairjudge_cli::CliError;

/// Pairwise response evaluation with LLM judges: calibrated verdicts,
/// position-bias audits, and agreement with human annotations.
#[derive(Parser)]
#[command(name = "pairjudge", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration file (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Override the judge backend: synthetic, live, or replay.
    #[arg(long)]
    backend: Option<String>,
    /// Override the synthetic judge's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the parent directory for run outputs.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let overrides = Overrides {
            backend: self.backend.as_deref().map(str::parse::<BackendKind>).transpose()?,
            seed: self.seed,
            out_dir: self.out_dir.clone(),
        };
        config::load(&self.config, &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Judge every question and write calibrated verdicts.
    Evaluate(RunArgs),
    /// Judge both presentation orders and measure verdict conflicts.
    AuditBias(RunArgs),
    /// Score an existing evaluation run against human annotations.
    Agreement {
        /// Evaluation run directory (holds per_question.jsonl).
        #[arg(long)]
        run: PathBuf,
        /// Annotations file (JSON lines).
        #[arg(long)]
        annotations: PathBuf,
        /// Parent directory for the new run (default: beside the source run).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Re-evaluate at several chain counts and compare agreement.
    SweepK {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated chain counts.
        #[arg(long, value_delimiter = ',', default_value = "1,3,5,7")]
        ks: Vec<u32>,
    },
    /// Completion-cache utilities.
    Cache {
        #[command(subcommand)]
        command: CacheCommand,
    },
}

#[derive(Args)]
struct CacheArgs {
    /// Cache directory.
    #[arg(long, conflicts_with = "config")]
    cache_dir: Option<PathBuf>,
    /// Run configuration whose judge.cache_dir names the cache.
    #[arg(long, short)]
    config: Option<PathBuf>,
}

impl CacheArgs {
    fn dir(&self) -> Result<PathBuf, CliError> {
        if let Some(dir) = &self.cache_dir {
            return Ok(dir.clone());
        }
        if let Some(path) = &self.config {
            let file = config::load_config_file(path)?;
            let dir = file.judge.cache_dir.ok_or_else(|| {
                CliError::Config(format!("{} sets no judge.cache_dir", path.display()))
            })?;
            let base = path.parent().unwrap_or_else(|| std::path::Path::new("."));
            return Ok(if dir.is_absolute() { dir } else { base.join(dir) });
        }
        Err(CliError::Usage("pass --cache-dir or --config".into()))
    }
}

#[derive(Subcommand)]
enum CacheCommand {
    /// List cached completions and per-model totals.
    Inspect(CacheArgs),
    /// Re-hash every record and check fingerprint integrity.
    Verify(CacheArgs),
}

fn load_dataset(config: &RunConfig) -> Result<LoadedDataset, CliError> {
    dataset::load(&config.dataset)
}

fn judge_for(config: &RunConfig, dataset: &LoadedDataset) -> Result<Box<dyn pairjudge_core::Judge>, CliError> {
    build_judge(&config.judge, &[&dataset.model_a, &dataset.model_b])
}

fn finish_with_failures(failed: usize) -> Result<(), CliError> {
    if failed > 0 {
        Err(CliError::Failures { failed })
    } else {
        Ok(())
    }
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evaluate(args) => {
            let config = args.resolve()?;
            let dataset = load_dataset(&config)?;
            let judge = judge_for(&config, &dataset)?;
            let outcome = run_evaluate(&config, judge.as_ref(), &dataset)?;
            let s = &outcome.summary;
            println!("run directory: {}", outcome.run_dir.display());
            println!(
                "{} vs. {} under judge {} ({}, k = {})",
                s.model_a, s.model_b, s.judge_model, s.strategy_name, s.k
            );
            println!(
                "verdicts over {} questions: {} wins {}, {} wins {}, ties {}",
                s.completed, s.model_a, s.verdicts.model_a, s.model_b, s.verdicts.model_b, s.verdicts.tie
            );
            if s.failed > 0 {
                println!("warning: {} question(s) produced no verdict", s.failed);
            }
            finish_with_failures(s.failed)
        }
        Command::AuditBias(args) => {
            let config = args.resolve()?;
            let dataset = load_dataset(&config)?;
            let judge = judge_for(&config, &dataset)?;
            let outcome = run_audit(&config, judge.as_ref(), &dataset)?;
            let s = &outcome.summary;
            println!("run directory: {}", outcome.run_dir.display());
            println!("conflict rate: {}", s.conflict_rate);
            println!(
                "{} wins {} when shown first, {} when shown second",
                s.model_a, s.model_a_first_rate, s.model_a_second_rate
            );
            if s.excluded > 0 {
                println!("warning: {} question(s) produced no verdict in some order", s.excluded);
            }
            finish_with_failures(s.excluded)
        }
        Command::Agreement { run, annotations, out_dir } => {
            let outcome = run_agreement(&run, &annotations, out_dir.as_deref())?;
            println!("run directory: {}", outcome.run_dir.display());
            for row in &outcome.summary.rows {
                println!(
                    "{} [{}]: accuracy {} ({}), kappa {:.2} ({})",
                    row.evaluator,
                    row.method,
                    row.accuracy_percent,
                    row.accuracy_exact,
                    row.kappa,
                    row.kappa_exact
                );
            }
            for warning in &outcome.warnings {
                println!("warning: {warning}");
            }
            Ok(())
        }
        Command::SweepK { run, ks } => {
            let config = run.resolve()?;
            let dataset = load_dataset(&config)?;
            let judge = judge_for(&config, &dataset)?;
            let outcome = run_sweep(&config, judge.as_ref(), &dataset, &ks)?;
            println!("run directory: {}", outcome.run_dir.display());
            for row in &outcome.summary.rows {
                println!(
                    "k = {}: accuracy {} ({}), kappa {:.2} ({})",
                    row.k, row.accuracy_percent, row.accuracy_exact, row.kappa, row.kappa_exact
                );
            }
            Ok(())
        }
        Command::Cache { command } => match command {
            CacheCommand::Inspect(args) => {
                print!("{}", run_cache_inspect(&args.dir()?)?);
                Ok(())
            }
            CacheCommand::Verify(args) => {
                let dir = args.dir()?;
                let report = run_cache_verify(&dir)?;
                println!("records: {}", report.records);
                println!("conflicting duplicates: {}", report.conflicting_duplicates);
                if report.is_clean() {
                    println!("cache is clean");
                    Ok(())
                } else {
                    for error in &report.errors {
                        eprintln!("error: {error}");
                    }
                    Err(CliError::Io(format!(
                        "cache {} failed verification with {} error(s)",
                        dir.display(),
                        report.errors.len()
                    )))
                }
            }
        },
    }
}

fn main() -> ExitCode {
    // Usage errors exit 1; clap's default of 2 would collide with the
    // config-error code.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Exit 6 means the run completed and wrote its outputs; the
            // message is a warning-grade summary, already printed above for
            // commands that reach it.
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
