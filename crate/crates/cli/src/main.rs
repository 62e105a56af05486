//! `tempora`: date texts by period from word and POS n-grams.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use tempora::synth::SynthConfig;

use config::{RunArgs, RunConfig};

#[derive(Parser)]
#[command(name = "tempora", version, about = "Temporal text classification over POS-annotated corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a corpus, and summarize it per time period.
    Ingest(RunArgs),
    /// Sample composite documents of a target length for every period.
    Compose(RunArgs),
    /// Cross-validate a classifier and write report.json, report.txt and confusion.csv.
    Cv(RunArgs),
    /// Train on all documents and write model.json.
    Train(RunArgs),
    /// Classify documents with a saved model and write predictions.csv.
    Predict(PredictArgs),
    /// Rank the most informative n-grams of each period in an SVM model.
    Features(FeaturesArgs),
    /// Write a synthetic dated corpus with gradual lexical and syntactic drift.
    Synth(SynthArgs),
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    model_file: PathBuf,
    /// Vertical files to classify instead of a manifest or composite directory.
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    model_file: PathBuf,
    /// Features listed per period.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Also list the most negative weights.
    #[arg(long)]
    negative: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    documents: usize,
    #[arg(long, default_value_t = 120)]
    sentences: usize,
    #[arg(long, default_value_t = 1501)]
    first_year: i32,
    #[arg(long, default_value_t = 2000)]
    last_year: i32,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(args) => commands::ingest(&RunConfig::resolve(&args)?),
        Command::Compose(args) => commands::compose(&RunConfig::resolve(&args)?),
        Command::Cv(args) => commands::cv(&RunConfig::resolve(&args)?).map(drop),
        Command::Train(args) => commands::train(&RunConfig::resolve(&args)?).map(drop),
        Command::Predict(args) => {
            let cfg = RunConfig::resolve(&args.run)?;
            commands::predict(&cfg, &args.model_file, &args.files).map(drop)
        }
        Command::Features(args) => {
            commands::features(&RunConfig::resolve(&args.run)?, &args.model_file, args.top, args.negative)
        }
        Command::Synth(args) => {
            let config = SynthConfig {
                seed: args.seed,
                documents: args.documents,
                sentences_per_doc: args.sentences,
                first_year: args.first_year,
                last_year: args.last_year,
                ..Default::default()
            };
            commands::synth(&config, &args.out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
