//! Command-line grammar.
//!
//! Flags that also exist as config-file keys are declared `Option` here;
//! [`crate::config`] merges flag > config file > built-in default.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "ecg-cli",
    version,
    about = "ECG heartbeat classification: fetch, detect, encode, train, evaluate",
    after_help = "Exit codes: 2 fetch, 3 detect, 4 encode, 5 train, 6 eval."
)]
pub struct Cli {
    /// Directory holding the .hea/.dat/.atr record files.
    #[arg(long, global = true, env = "ECG_DATA_DIR", default_value = "./data")]
    pub data_dir: PathBuf,

    /// Seed for every random choice (weight init, shuffles, noise).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Plain key=value settings file; explicit flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for parallel sections (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Download records into the data directory.
    Fetch(FetchArgs),
    /// Find R peaks; print one CSV line per beat.
    Detect(DetectArgs),
    /// Encode annotated beats into a sparse-signature file.
    Encode(EncodeArgs),
    /// Train a classifier on an encoded beat file.
    Train(TrainArgs),
    /// Score a trained classifier against an encoded beat file.
    Eval(EvalArgs),
    /// Re-run detection + classification under additive noise at several
    /// signal-to-noise ratios.
    NoiseSweep(SweepArgs),
    /// Stream one record through detect -> encode -> classify with
    /// per-beat timing.
    Online(OnlineArgs),
    /// Whole offline phase: detect, encode, split, train, evaluate.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Record names, e.g. `100 208`.
    #[arg(required = true)]
    pub records: Vec<String>,

    /// Where to download from; falls back to the public database mirror.
    #[arg(long, env = "ECG_BASE_URL")]
    pub base_url: Option<String>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Record names to scan.
    #[arg(required = true)]
    pub records: Vec<String>,

    /// Signal channel to analyse.
    #[arg(long)]
    pub channel: Option<usize>,

    /// Also write the CSV to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Record names to encode.
    #[arg(required = true)]
    pub records: Vec<String>,

    /// Signal channel to encode from.
    #[arg(long)]
    pub channel: Option<usize>,

    /// Output signature file.
    #[arg(long, default_value = "signatures.ecgs")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Encoded beat file to train on.
    #[arg(long)]
    pub input: PathBuf,

    /// Where to write the trained model (a metadata sidecar is written
    /// next to it with a .json suffix).
    #[arg(long, default_value = "model.ecgm")]
    pub model_out: PathBuf,

    /// Hidden layer widths, comma separated (e.g. `256` or `300,100`).
    #[arg(long)]
    pub hidden: Option<String>,

    /// Full passes over the training set.
    #[arg(long)]
    pub epochs: Option<usize>,

    /// Learning rate.
    #[arg(long)]
    pub lr: Option<f64>,

    /// Momentum coefficient.
    #[arg(long)]
    pub momentum: Option<f64>,

    /// Mini-batch size.
    #[arg(long)]
    pub batch: Option<usize>,

    /// Label space: `5` for the standard five beat families, `23` for
    /// per-symbol classes.
    #[arg(long)]
    pub classes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Trained model (its .json sidecar must sit next to it).
    #[arg(long)]
    pub model: PathBuf,

    /// Encoded beat file to score.
    #[arg(long)]
    pub input: PathBuf,

    /// Directory for report.json / per_class.csv / summary.csv.
    #[arg(long, default_value = ".")]
    pub report_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Record to corrupt and re-classify.
    #[arg(long)]
    pub record: String,

    /// Trained model (with sidecar).
    #[arg(long)]
    pub model: PathBuf,

    /// Ratios in dB: a `start:stop:step` range (inclusive) or a comma
    /// list, e.g. `0:20:2` or `0,6,12`.
    #[arg(long)]
    pub snr: Option<String>,

    /// Signal channel to corrupt.
    #[arg(long)]
    pub channel: Option<usize>,

    /// Detection-to-annotation matching tolerance, in milliseconds.
    #[arg(long)]
    pub tolerance_ms: Option<f64>,

    /// Also write the CSV to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OnlineArgs {
    /// Record to stream.
    #[arg(long)]
    pub record: String,

    /// Trained model (with sidecar).
    #[arg(long)]
    pub model: PathBuf,

    /// Signal channel to stream.
    #[arg(long)]
    pub channel: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Record names, comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    pub records: Vec<String>,

    /// Signal channel to analyse.
    #[arg(long)]
    pub channel: Option<usize>,

    /// Label spaces to train: `5`, `23`, or `both`.
    #[arg(long)]
    pub classes: Option<String>,

    /// Hidden layer widths, comma separated.
    #[arg(long)]
    pub hidden: Option<String>,

    /// Full passes over the training set.
    #[arg(long)]
    pub epochs: Option<usize>,

    /// Learning rate.
    #[arg(long)]
    pub lr: Option<f64>,

    /// Momentum coefficient.
    #[arg(long)]
    pub momentum: Option<f64>,

    /// Mini-batch size.
    #[arg(long)]
    pub batch: Option<usize>,

    /// Training-set size; default scales to the corpus (5% of beats, at
    /// least 200, at most 80% of beats).
    #[arg(long)]
    pub train_count: Option<usize>,

    /// Detector-quality matching tolerance, in milliseconds.
    #[arg(long)]
    pub tolerance_ms: Option<f64>,

    /// Directory for every artifact this run writes.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}
