mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::PipelineFlags;

/// Build and analyse a crowdsourced word-emotion lexicon.
#[derive(Debug, Parser)]
#[command(name = "emolex", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Master seed for randomized steps
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML config file; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path (a directory for `simulate`); stdout when omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Tabular)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Tabular,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FramingArg {
    Associated,
    Evokes,
}

impl From<FramingArg> for emolex::Framing {
    fn from(f: FramingArg) -> Self {
        match f {
            FramingArg::Associated => emolex::Framing::Associated,
            FramingArg::Evokes => emolex::Framing::Evokes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Four,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuestionsArg {
    Emotions,
    Polarity,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select targets and write the HIT file
    GenHits(GenHitsArgs),
    /// Run quality control and write the master set and audit report
    Validate(ValidateArgs),
    /// Aggregate the master set into a lexicon
    Aggregate(AggregateArgs),
    /// Majority-size histogram and Fleiss's kappa for one question set
    Stats(StatsArgs),
    /// Write every analysis table
    Report(ReportArgs),
    /// Generate synthetic assignments with planted ground truth
    Simulate(SimulateArgs),
    /// Compare unanimity between two framings of the same terms
    CompareFramings(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenHitsArgs {
    #[arg(long)]
    pub thesaurus: PathBuf,
    /// Ready-made target list; combined with any other sources given
    #[arg(long)]
    pub targets: Option<PathBuf>,
    /// Frequency list for selecting frequent unigrams and bigrams
    #[arg(long)]
    pub frequency: Option<PathBuf>,
    /// Terms per part of speech and n-gram order taken from the frequency list
    #[arg(long, default_value_t = 200)]
    pub top_k: usize,
    /// Polarity-lexicon term list (`term<TAB>class`)
    #[arg(long)]
    pub gi: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub gi_max_senses: usize,
    /// Affect-lexicon term list (`term<TAB>emotion`)
    #[arg(long)]
    pub wal: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub wal_max_senses: usize,
    /// Question wording; repeat to emit both
    #[arg(long, value_enum, default_values_t = [FramingArg::Associated])]
    pub framing: Vec<FramingArg>,
    /// Write the questionnaire text instead of records
    #[arg(long)]
    pub text: bool,
    /// Where to write the selected targets
    #[arg(long)]
    pub targets_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub hits: PathBuf,
    #[arg(long)]
    pub assignments: PathBuf,
    /// Where to write the audit report (JSON)
    #[arg(long)]
    pub audit: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    pub hits: PathBuf,
    #[arg(long)]
    pub master: PathBuf,
    /// Target list supplying source tags
    #[arg(long)]
    pub targets: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub hits: PathBuf,
    #[arg(long)]
    pub master: PathBuf,
    #[arg(long, value_enum, default_value_t = LevelArg::Four)]
    pub level: LevelArg,
    #[arg(long, value_enum, default_value_t = QuestionsArg::Emotions)]
    pub questions: QuestionsArg,
    #[arg(long, default_value_t = 5)]
    pub raters: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// HIT files; repeat to cover the comparison master set
    #[arg(long, required = true)]
    pub hits: Vec<PathBuf>,
    #[arg(long)]
    pub master: PathBuf,
    #[arg(long)]
    pub targets: Option<PathBuf>,
    /// Audit report from `validate`
    #[arg(long)]
    pub audit: Option<PathBuf>,
    /// Second master set annotated under the other framing
    #[arg(long)]
    pub compare_master: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub raters: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulate over an existing HIT file instead of a synthetic corpus
    #[arg(long)]
    pub hits: Option<PathBuf>,
    /// Ground truth for `--hits`; random truth is planted when omitted
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Synthetic corpus size; overrides the config
    #[arg(long)]
    pub targets: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// HIT files covering both master sets
    #[arg(long, required = true)]
    pub hits: Vec<PathBuf>,
    #[arg(long)]
    pub master_a: PathBuf,
    #[arg(long)]
    pub master_b: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub raters: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    use std::io::ErrorKind::BrokenPipe;
    e.chain().any(|c| {
        if let Some(io) = c.downcast_ref::<std::io::Error>() {
            return io.kind() == BrokenPipe;
        }
        if let Some(json) = c.downcast_ref::<serde_json::Error>() {
            return json.io_error_kind() == Some(BrokenPipe);
        }
        match c.downcast_ref::<emolex::Error>() {
            Some(emolex::Error::Io(io)) => io.kind() == BrokenPipe,
            Some(emolex::Error::Json(json)) => json.io_error_kind() == Some(BrokenPipe),
            _ => false,
        }
    })
}
