mod commands;
mod fingerprint;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit code for malformed or inconsistent input data.
const EXIT_INPUT: u8 = 2;
/// Exit code for bad flags, settings or model files.
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "polyclust", version, about = "Online multilingual news story clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an IDF table from a document stream
    BuildIdf(BuildIdfArgs),
    /// Cluster a document stream
    Cluster(ClusterArgs),
    /// Train similarity weights and, optionally, a merge classifier
    Train(TrainArgs),
    /// Tune the join threshold on a labeled stream
    TuneTau(TuneTauArgs),
    /// Score assignments against gold labels
    Evaluate(EvaluateArgs),
    /// Cluster each language with the CluStream baseline
    Baseline(BaselineArgs),
    /// Convert a third-party article dump to the stream format
    Convert(ConvertArgs),
    /// Write a synthetic labeled stream and its toy embeddings
    Synth(SynthArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnotatorKind {
    /// Built-in tokenizer; lemmas equal tokens, no entities
    None,
    /// External program given by --annotator-cmd
    ExternalCommand,
}

#[derive(Args, Debug, serde::Serialize)]
pub struct FeatureArgs {
    /// IDF table; built from the input stream itself when omitted
    #[arg(long)]
    idf: Option<PathBuf>,
    /// Crosslingual word embeddings (`word v1 .. vn` per line)
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    annotator: AnnotatorKind,
    /// Command line of the external annotator
    #[arg(long)]
    annotator_cmd: Option<String>,
}

#[derive(Args, Debug)]
pub struct BuildIdfArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Restrict to one language; every language in the input otherwise
    #[arg(long)]
    language: Option<String>,
    #[arg(long, value_enum, default_value = "none")]
    annotator: AnnotatorKind,
    #[arg(long)]
    annotator_cmd: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CrossModeArg {
    Sum,
    Pivot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GUpdateArg {
    Immutable,
    Domino,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    /// Assignments, one JSON record per document
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    features: FeatureArgs,
    /// Ranker file; all-ones weights when omitted
    #[arg(long)]
    ranker: Option<PathBuf>,
    /// Merge classifier file; replaces the threshold policy
    #[arg(long)]
    merge_model: Option<PathBuf>,
    /// Join threshold; overrides the ranker file's tuned value
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    /// Width of the timestamp features in hours
    #[arg(long)]
    sigma_hours: Option<f64>,
    /// Pivot language; implies --cross-mode pivot
    #[arg(long)]
    pivot: Option<String>,
    /// Score pivot-less crosslingual clusters by summing in pivot mode
    #[arg(long)]
    pivot_fallback: bool,
    #[arg(long, value_enum)]
    cross_mode: Option<CrossModeArg>,
    #[arg(long, value_enum, default_value = "domino")]
    g_update: GUpdateArg,
    /// Minimum crosslingual score for a crosslingual cluster to be a candidate
    #[arg(long, allow_hyphen_values = true)]
    cross_tau: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    topple_budget: usize,
    /// Accepted for uniformity; clustering is deterministic
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerated backwards jump in timestamps, in hours (`inf` disables)
    #[arg(long, default_value_t = polyclust::io::DEFAULT_SLACK_HOURS)]
    slack: f64,
    /// Also write the final clustering state as JSON
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Labeled training stream
    #[arg(long)]
    input: PathBuf,
    /// Ranker file to write
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    features: FeatureArgs,
    /// Also train a merge classifier and write it here
    #[arg(long)]
    merge_model: Option<PathBuf>,
    /// Labeled development stream; tunes tau into the ranker file
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long, default_value_t = polyclust::similarity::DEFAULT_SIGMA_HOURS)]
    sigma_hours: f64,
    /// Regularization constant of the merge classifier
    #[arg(long, default_value_t = 10.0)]
    merge_c: f64,
    /// Write the generated ranking data as TSV
    #[arg(long)]
    dump_ranking: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = polyclust::io::DEFAULT_SLACK_HOURS)]
    slack: f64,
}

#[derive(Args, Debug)]
pub struct TuneTauArgs {
    /// Labeled development stream
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    features: FeatureArgs,
    /// Ranker file; all-ones weights when omitted
    #[arg(long)]
    ranker: Option<PathBuf>,
    /// Write the ranker file with the tuned tau
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    sigma_hours: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    tau_lo: f64,
    #[arg(long, default_value_t = 12.0, allow_hyphen_values = true)]
    tau_hi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = polyclust::io::DEFAULT_SLACK_HOURS)]
    slack: f64,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Assignments written by `cluster` or `baseline`
    #[arg(long)]
    input: PathBuf,
    /// Labeled stream the assignments were computed on
    #[arg(long)]
    gold: PathBuf,
    /// Write the metrics report as JSON
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    features: FeatureArgs,
    /// Micro-cluster capacity per language; twice the gold cluster count
    /// when omitted and labels are present
    #[arg(long)]
    max_clusters: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    boundary_factor: f64,
    /// Retire micro-clusters idle for longer than this
    #[arg(long)]
    horizon_hours: Option<f64>,
    /// Subvector the baseline clusters on (0..12)
    #[arg(long, default_value_t = 0)]
    subvector: usize,
    #[arg(long, default_value_t = polyclust::io::DEFAULT_SLACK_HOURS)]
    slack: f64,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// JSON object mapping stream fields to source field names
    #[arg(long)]
    field_map: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Three stories in three languages with disjoint vocabularies
    Separable,
    /// Trilingual stream whose titles carry only background words
    NoisyTitles,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Stream to write
    #[arg(long)]
    output: PathBuf,
    /// Embeddings file to write
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long, value_enum, default_value = "separable")]
    preset: Preset,
    /// Total documents (rounded down to whole rounds for `separable`)
    #[arg(long, default_value_t = 36)]
    docs: usize,
    /// Full generator settings as JSON; overrides --preset and --docs
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Error raised by the command layer itself, outside the library.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Config(String),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<polyclust::Error>() {
            return if e.is_input_error() { EXIT_INPUT } else { EXIT_CONFIG };
        }
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::Input(_) => EXIT_INPUT,
                CliError::Config(_) => EXIT_CONFIG,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_INPUT;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::BuildIdf(a) => commands::build_idf(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Train(a) => commands::train(a),
        Command::TuneTau(a) => commands::tune_tau(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Baseline(a) => commands::baseline(a),
        Command::Convert(a) => commands::convert(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
