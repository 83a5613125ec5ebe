use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cogh_core::{BeliefWeights, Mechanism, ModelKind};

use crate::table::Format;

#[derive(Debug, Parser)]
#[command(name = "cogh", version, about = "Cognitive-hierarchy analysis of two-player game play")]
pub struct Cli {
    /// Game corpus JSON; the builtin corpus when omitted.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Maximum level count for fitting and synthetic hierarchy players.
    #[arg(long, global = true, default_value_t = 4)]
    pub k_hat: usize,
    #[arg(long, global = true, default_value_t = 10)]
    pub restarts: usize,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List or show corpus games.
    Games {
        #[command(subcommand)]
        action: GamesAction,
    },
    /// Sample a synthetic log from generator policies.
    Simulate(SimulateArgs),
    /// Fit hierarchy models to logs.
    Fit(FitArgs),
    /// Likelihood improvement ratios across maximum levels.
    SelectK(SelectKArgs),
    /// Level, robustness, KL and utility tables.
    Report(ReportArgs),
    /// Play endpoints against each other and record logs.
    Collect(CollectArgs),
}

#[derive(Debug, Subcommand)]
pub enum GamesAction {
    List,
    Show { id: String },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub game: String,
    /// uniform, fixed:p1,p2,.., poisson:LAMBDA or level-k:A0,A1,..;E1,E2,..
    #[arg(long, default_value = "uniform")]
    pub row: String,
    #[arg(long, default_value = "uniform")]
    pub col: String,
    #[arg(long, default_value_t = cogh_core::store::DEFAULT_ROUNDS)]
    pub rounds: usize,
    /// Mechanism label written into the log.
    #[arg(long, value_parser = parse_mechanism, default_value = "baseline")]
    pub mechanism: Mechanism,
    /// Output file; defaults to a name under <out-dir>/logs.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    LevelK,
    Poisson,
    Both,
}

impl ModelChoice {
    pub fn kinds(self) -> Vec<ModelKind> {
        match self {
            ModelChoice::LevelK => vec![ModelKind::LevelK],
            ModelChoice::Poisson => vec![ModelKind::PoissonCh],
            ModelChoice::Both => vec![ModelKind::LevelK, ModelKind::PoissonCh],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BeliefChoice {
    Own,
    Opponent,
}

impl From<BeliefChoice> for BeliefWeights {
    fn from(b: BeliefChoice) -> Self {
        match b {
            BeliefChoice::Own => BeliefWeights::Own,
            BeliefChoice::Opponent => BeliefWeights::Opponent,
        }
    }
}

#[derive(Debug, Args)]
pub struct LogInput {
    /// Log files or directories of *.jsonl files.
    #[arg(long, num_args = 1.., required = true)]
    pub logs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModelChoice::Both)]
    pub model: ModelChoice,
    /// Whose Poisson rate weights a player's beliefs about lower levels.
    #[arg(long, value_enum, default_value_t = BeliefChoice::Own)]
    pub beliefs: BeliefChoice,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: LogInput,
}

#[derive(Debug, Args)]
pub struct SelectKArgs {
    #[command(flatten)]
    pub input: LogInput,
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    pub k_hats: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory of fit records; <out-dir>/fits when omitted.
    #[arg(long)]
    pub fits: Option<PathBuf>,
    /// Logs for the utility tables; fit records are used when omitted.
    #[arg(long, num_args = 1..)]
    pub logs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    /// Scripted mock fixture (TOML).
    #[arg(long, conflicts_with = "endpoints")]
    pub mock: Option<PathBuf>,
    /// Live endpoint definitions (TOML with [[endpoints]] tables).
    #[arg(long)]
    pub endpoints: Option<PathBuf>,
    /// Campaign manifest (TOML or JSON); built from the flags below when omitted.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// `all` or a comma-separated list of game ids.
    #[arg(long, default_value = "all")]
    pub games: String,
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    #[arg(long, value_parser = parse_mechanism, default_value = "baseline")]
    pub mechanism: Mechanism,
    #[arg(long, default_value_t = cogh_core::store::DEFAULT_ROUNDS)]
    pub rounds: usize,
    /// Archive raw request and response bodies under <out-dir>/archive.
    #[arg(long)]
    pub archive: bool,
    #[arg(long, default_value_t = 4)]
    pub max_parallel: usize,
    #[arg(long)]
    pub temperature: Option<f64>,
}

fn parse_mechanism(s: &str) -> Result<Mechanism, String> {
    s.parse().map_err(|e: cogh_core::Error| e.to_string())
}
