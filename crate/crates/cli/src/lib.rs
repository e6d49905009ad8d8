//! The `medread` command line: corpus ingestion and validation, metric
//! scoring, span tagging and evaluation, and readability correlation reports.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

mod commands;
mod ingest;
mod output;

pub use output::{Cell, Format, Table};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<medread_core::Error> for CliError {
    fn from(e: medread_core::Error) -> Self {
        use medread_core::Error as E;
        match e {
            E::Io { .. } => CliError::Io(e.to_string()),
            E::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "medread", version, about = "Readability and jargon analysis for medical sentences")]
struct Cli {
    #[command(flatten)]
    options: Options,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand. Any of them may also come from the
/// `--config` file; flags take precedence.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    /// TOML file with default values for these options
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Canonical JSONL corpus
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// train, dev, test or all
    #[arg(long, global = true)]
    pub split: Option<String>,
    /// Metric names, comma separated or repeated
    #[arg(long, global = true, value_delimiter = ',')]
    pub metric: Vec<String>,
    /// TSV of metric<TAB>alpha jargon weights
    #[arg(long, global = true)]
    pub alpha_file: Option<PathBuf>,
    /// Alpha search grid LO:HI:STEP
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// gold, lexicon, or file=PATH
    #[arg(long, global = true)]
    pub jargon: Option<String>,
    /// Lexicon TSV for the tagger (built from the train split when absent)
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Directory with aoa.tsv, zipf.tsv, common2000.txt and unigram.tsv
    #[arg(long, global = true)]
    pub resources: Option<PathBuf>,
    /// binary, 3 or 7; comma separated or repeated
    #[arg(long, global = true, value_delimiter = ',')]
    pub granularity: Vec<String>,
    /// token, partial or exact; comma separated or repeated
    #[arg(long = "match", global = true, value_delimiter = ',')]
    #[serde(rename = "match")]
    pub match_mode: Vec<String>,
    /// source or none
    #[arg(long, global = true)]
    pub group_by: Option<String>,
    /// Bootstrap resamples (0 disables intervals)
    #[arg(long, global = true)]
    pub bootstrap: Option<usize>,
    /// Confidence level of bootstrap intervals
    #[arg(long, global = true)]
    pub level: Option<f64>,
    /// Seed for bootstrap resampling
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv, json or jsonl
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Worker threads for per-sentence work
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

macro_rules! fill {
    ($dst:ident, $src:ident; $($opt:ident),* ; $($vec:ident),*) => {
        $( if $dst.$opt.is_none() { $dst.$opt = $src.$opt.take(); } )*
        $( if $dst.$vec.is_empty() { $dst.$vec = std::mem::take(&mut $src.$vec); } )*
    };
}

impl Options {
    /// Fills unset options from `config`.
    pub fn merge(&mut self, mut config: Options) {
        fill!(self, config;
            corpus, split, alpha_file, grid, jargon, lexicon, resources, group_by,
            bootstrap, level, seed, out, format, jobs;
            metric, granularity, match_mode);
    }

    fn load_config(path: &Path) -> Result<Options, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a raw release file into the canonical corpus format
    Ingest(commands::IngestArgs),
    /// Check every corpus invariant and list violations
    Validate,
    /// Score sentences with readability metrics
    Score,
    /// Tag complex spans with the lexicon tagger
    Tag(commands::TagArgs),
    /// Grid-search the jargon weight of -Jar metrics on a split
    TuneAlpha(commands::TuneArgs),
    /// Evaluate predicted spans against gold
    EvalSpans,
    /// Correlate metric scores with gold readability
    EvalReadability(commands::EvalReadabilityArgs),
    /// Extract lexical and jargon features
    Features,
    /// Corpus-level summaries and correlation tables
    Report(commands::ReportArgs),
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("medread: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut options = cli.options;
    if let Some(path) = options.config.clone() {
        options.merge(Options::load_config(&path)?);
    }
    if options.resources.is_none() {
        options.resources = std::env::var_os("MEDREAD_RESOURCES").map(PathBuf::from);
    }
    let config = commands::RunConfig::resolve(options)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", config.jobs.unwrap_or(0))))?;
    pool.install(|| match cli.command {
        Command::Ingest(args) => commands::ingest(&config, &args),
        Command::Validate => commands::validate(&config),
        Command::Score => commands::score(&config),
        Command::Tag(args) => commands::tag(&config, &args),
        Command::TuneAlpha(args) => commands::tune_alpha(&config, &args),
        Command::EvalSpans => commands::eval_spans(&config),
        Command::EvalReadability(args) => commands::eval_readability(&config, &args),
        Command::Features => commands::features(&config),
        Command::Report(args) => commands::report(&config, &args),
    })
}
