//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lyrik::analysis::FrequencyRanking;
use lyrik::corpus::{build_slots, TimeSlotTable};
use lyrik::trainer::TrainConfig;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SlotMode {
    Fixed,
    Sliding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Ranking {
    Global,
    PerSlot,
}

/// Every field is optional; unset values fall back to the defaults in [`Resolved`].
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub spec: Option<PathBuf>,
    pub slots: Option<SlotMode>,
    pub start: Option<i32>,
    pub end: Option<i32>,
    pub window: Option<i32>,
    pub step: Option<i32>,
    pub merge_first: Option<bool>,
    pub strict: Option<bool>,
    pub min_count: Option<u64>,
    pub train: Option<TrainConfig>,
    pub top_n: Option<usize>,
    pub ranking: Option<Ranking>,
    pub k: Option<usize>,
    pub min_per_slot: Option<u64>,
    pub target: Option<String>,
    pub min_global: Option<u64>,
    pub top_k: Option<usize>,
    pub components: Option<usize>,
}

/// Flags shared by all subcommands. Each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus in JSON Lines format (ingest input)
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Token-to-lemma TSV
    #[arg(long)]
    pub lemmas: Option<PathBuf>,
    /// Stopword list, one word per line
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Model file (default: <out>/model.dlkv)
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Synthetic corpus spec (synth)
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub slots: Option<SlotMode>,
    /// First year covered by the slot table
    #[arg(long)]
    pub start: Option<i32>,
    /// End year (exclusive) of the slot table
    #[arg(long)]
    pub end: Option<i32>,
    /// Slot width in years
    #[arg(long)]
    pub window: Option<i32>,
    /// Distance between slot starts in years
    #[arg(long)]
    pub step: Option<i32>,
    /// Merge the first two fixed slots into one
    #[arg(long)]
    pub merge_first: bool,
    /// Abort on malformed corpus lines
    #[arg(long)]
    pub strict: bool,
    /// Minimum global count for the training vocabulary
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Number of most frequent words for pairwise self-similarity
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long, value_enum)]
    pub ranking: Option<Ranking>,
    /// Number of change points to report
    #[arg(long)]
    pub k: Option<usize>,
    /// Minimum occurrences in every slot
    #[arg(long)]
    pub min_per_slot: Option<u64>,
    /// Target word for trope trajectories
    #[arg(long)]
    pub target: Option<String>,
    /// Minimum global count of trope candidates
    #[arg(long)]
    pub min_global: Option<u64>,
    /// Candidates listed at each component extreme
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Principal components to compute
    #[arg(long)]
    pub components: Option<usize>,
}

/// Configuration with every default filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub corpus: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub model: PathBuf,
    pub out: PathBuf,
    pub spec: Option<PathBuf>,
    pub start: i32,
    pub end: i32,
    pub window: i32,
    pub step: i32,
    pub merge_first: bool,
    pub strict: bool,
    pub min_count: u64,
    pub train: TrainConfig,
    pub top_n: usize,
    pub ranking: FrequencyRanking,
    pub k: usize,
    pub min_per_slot: u64,
    pub target: Option<String>,
    pub min_global: u64,
    pub top_k: usize,
    pub components: usize,
}

impl Resolved {
    pub fn slot_table(&self) -> Result<TimeSlotTable, CliError> {
        build_slots(self.start, self.end, self.window, self.step, self.merge_first)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn cache_path(&self) -> PathBuf {
        self.out.join("normalized.jsonl")
    }

    pub fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

pub fn resolve(args: &RunArgs) -> Result<Resolved, CliError> {
    let file = match &args.config {
        Some(path) => read_config(path)?,
        None => RunConfig::default(),
    };
    let out = args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("."));
    let slots = args.slots.or(file.slots).unwrap_or(SlotMode::Fixed);
    let window = args.window.or(file.window).unwrap_or(50);
    let step = args.step.or(file.step).unwrap_or(match slots {
        SlotMode::Fixed => window,
        SlotMode::Sliding => window / 2,
    });
    match slots {
        SlotMode::Fixed if step != window => {
            return Err(CliError::Usage(format!(
                "fixed slots need step == window (got {step} and {window})"
            )))
        }
        SlotMode::Sliding if step >= window => {
            return Err(CliError::Usage(format!(
                "sliding slots need step < window (got {step} and {window})"
            )))
        }
        _ => {}
    }
    let mut train = file.train.unwrap_or_default();
    if let Some(v) = args.dim {
        train.dim = v;
    }
    if let Some(v) = args.epochs {
        train.epochs = v;
    }
    if let Some(v) = args.seed {
        train.seed = v;
    }
    if let Some(v) = args.workers {
        train.workers = v;
    }
    train.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let ranking = match args.ranking.or(file.ranking).unwrap_or(Ranking::Global) {
        Ranking::Global => FrequencyRanking::Global,
        Ranking::PerSlot => FrequencyRanking::PerSlot,
    };
    let resolved = Resolved {
        corpus: args.corpus.clone().or(file.corpus),
        lemmas: args.lemmas.clone().or(file.lemmas),
        stopwords: args.stopwords.clone().or(file.stopwords),
        model: args
            .model
            .clone()
            .or(file.model)
            .unwrap_or_else(|| out.join("model.dlkv")),
        spec: args.spec.clone().or(file.spec),
        out,
        start: args.start.or(file.start).unwrap_or(1575),
        end: args.end.or(file.end).unwrap_or(1925),
        window,
        step,
        merge_first: args.merge_first || file.merge_first.unwrap_or(false),
        strict: args.strict || file.strict.unwrap_or(false),
        min_count: args.min_count.or(file.min_count).unwrap_or(5),
        train,
        top_n: args.top_n.or(file.top_n).unwrap_or(3000),
        ranking,
        k: args.k.or(file.k).unwrap_or(3),
        min_per_slot: args.min_per_slot.or(file.min_per_slot).unwrap_or(50),
        target: args.target.clone().or(file.target),
        min_global: args.min_global.or(file.min_global).unwrap_or(30),
        top_k: args.top_k.or(file.top_k).unwrap_or(25),
        components: args.components.or(file.components).unwrap_or(4),
    };
    for path in [&resolved.corpus, &resolved.lemmas, &resolved.stopwords, &resolved.spec]
        .into_iter()
        .flatten()
    {
        if !path.exists() {
            return Err(CliError::Usage(format!("input file {} does not exist", path.display())));
        }
    }
    Ok(resolved)
}
