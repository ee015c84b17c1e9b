//! `scanb`: ingest a Reuters-style corpus, train and apply structural-context
//! naive Bayes models, and run cross-validated comparisons.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Overrides};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "scanb", version, about = "Structural-context naive Bayes experiments")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load the corpus, print a summary and optionally write an NDJSON dump.
    Ingest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train on the whole corpus and save the model.
    Train {
        #[arg(long, default_value = "model.json")]
        out: PathBuf,
    },
    /// Print `doc_id<TAB>label` for every document in the given files.
    Classify {
        model: PathBuf,
        #[arg(required = true)]
        documents: Vec<PathBuf>,
        /// One-vs-rest label sets instead of the single best category.
        #[arg(long)]
        multilabel: bool,
    },
    /// Cross-validate the configured model.
    Evaluate {
        /// Directory for report.json, report.txt and predictions.ndjson.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate every model in the `compare` list on one fold plan.
    Compare {
        /// Directory for comparison.json, .txt and .csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = &mut std::io::stdout().lock();
    if let Command::Classify {
        model,
        documents,
        multilabel,
    } = &cli.command
    {
        return commands::classify(model, documents, *multilabel, stdout);
    }
    let config = ExperimentConfig::resolve(&cli.overrides)?;
    if config.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    log::debug!("config {}", config.fingerprint());
    match &cli.command {
        Command::Ingest { out } => commands::ingest(&config, out.as_deref(), stdout),
        Command::Train { out } => commands::train(&config, out),
        Command::Evaluate { out } => commands::evaluate(&config, out.as_deref(), stdout),
        Command::Compare { out } => commands::compare(&config, out.as_deref(), stdout),
        Command::Classify { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
