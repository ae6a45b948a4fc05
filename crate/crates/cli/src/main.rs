//! `lyrik`: diachronic embedding pipeline from corpus ingest to trope plots.

mod commands;
mod config;
mod error;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunArgs;
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "lyrik",
    version,
    about = "Semantic change analysis for diachronic poetry corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read, deduplicate and normalize a corpus; print its statistics
    Ingest(RunArgs),
    /// Train the joint embedding model on the normalized corpus
    Train(RunArgs),
    /// Adjacent-slot self-similarity (CSV + box plot)
    Selfsim(RunArgs),
    /// Self-similarity by slot distance (CSV + box plot)
    Totalsim(RunArgs),
    /// Deepest local minima of pairwise self-similarity
    Changepoints(RunArgs),
    /// Similarity trajectories of a target word and their principal components
    Tropes(RunArgs),
    /// Generate a synthetic corpus from a JSON spec
    Synth(RunArgs),
}

type Handler = fn(&config::Resolved) -> Result<(), CliError>;

fn run(command: Command) -> Result<(), CliError> {
    let (args, cmd): (&RunArgs, Handler) = match &command {
        Command::Ingest(a) => (a, commands::ingest),
        Command::Train(a) => (a, commands::train),
        Command::Selfsim(a) => (a, commands::selfsim),
        Command::Totalsim(a) => (a, commands::totalsim),
        Command::Changepoints(a) => (a, commands::changepoints),
        Command::Tropes(a) => (a, commands::tropes),
        Command::Synth(a) => {
            let cfg = config::resolve(a)?;
            return commands::synth(&cfg, a.seed);
        }
    };
    cmd(&config::resolve(args)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}
