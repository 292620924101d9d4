//! Settings resolution and configuration hashing.
//!
//! Every knob resolves in the same order: explicit flag, then config-file
//! key, then built-in default.  The config file is plain `key = value`
//! text, one setting per line, `#` comments allowed.  Recognized keys:
//!
//! ```text
//! records      comma-separated record names        (pipeline)
//! channel      signal channel index                (detect/encode/sweep/online/pipeline)
//! seed         u64 seed                            (all seeded commands)
//! hidden       comma-separated hidden layer widths (train/pipeline)
//! epochs       training epochs                     (train/pipeline)
//! lr           learning rate                       (train/pipeline)
//! momentum     momentum coefficient                (train/pipeline)
//! batch        mini-batch size                     (train/pipeline)
//! classes      5, 23, or both (pipeline only)      (train/pipeline)
//! train_count  training-set size                   (pipeline)
//! tolerance_ms match tolerance in milliseconds     (sweep/pipeline)
//! snr          SNR list or start:stop:step range   (noise-sweep)
//! ```
//!
//! Paths (`--data-dir`, outputs) and `--jobs` are deliberately not config
//! keys: they never change a result, only where it reads/writes and how
//! fast it runs — which is also why they are excluded from the
//! configuration hash.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::args::{Cli, Command};
use crate::{CliError, Stage};

/// Default seed when neither flag nor config file supplies one.
pub const DEFAULT_SEED: u64 = 1;

const KNOWN_KEYS: &[&str] = &[
    "records",
    "channel",
    "seed",
    "hidden",
    "epochs",
    "lr",
    "momentum",
    "batch",
    "classes",
    "train_count",
    "tolerance_ms",
    "snr",
];

/// Parsed `key = value` settings file.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    /// Reads and validates a settings file.
    pub fn load(path: &Path) -> Result<FileConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut values = BTreeMap::new();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "{} line {}: expected `key = value`, got `{line}`",
                    path.display(),
                    number + 1
                ));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!(
                    "{} line {}: unknown key `{key}` (known: {})",
                    path.display(),
                    number + 1,
                    KNOWN_KEYS.join(", ")
                ));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(format!(
                    "{} line {}: key `{key}` given twice",
                    path.display(),
                    number + 1
                ));
            }
        }
        Ok(FileConfig { values })
    }

    /// Raw string value of a key, if the file sets it.
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parsed value of a key, if the file sets it.
    pub fn parsed<T>(&self, key: &str) -> Result<Option<T>, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(text) => text
                .parse()
                .map(Some)
                .map_err(|e| format!("config key `{key}`: {e} (value `{text}`)")),
        }
    }
}

/// Global settings shared by every command, resolved once at startup.
#[derive(Debug)]
pub struct Context {
    pub data_dir: PathBuf,
    pub seed: u64,
    pub jobs: usize,
    pub file: FileConfig,
}

impl Context {
    /// Resolves global flags plus the optional config file.  Errors are
    /// attributed to the stage of the command about to run.
    pub fn resolve(cli: &Cli) -> Result<Context, CliError> {
        let stage = command_stage(&cli.command);
        let file = match &cli.config {
            Some(path) => FileConfig::load(path).map_err(CliError::at(stage))?,
            None => FileConfig::default(),
        };
        let seed = match cli.seed {
            Some(seed) => seed,
            None => file
                .parsed("seed")
                .map_err(CliError::at(stage))?
                .unwrap_or(DEFAULT_SEED),
        };
        Ok(Context {
            data_dir: cli.data_dir.clone(),
            seed,
            jobs: cli.jobs,
            file,
        })
    }

    /// Flag > config file > default, for any parseable type.
    pub fn setting<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(value) => Ok(value),
            None => Ok(self.parsed_key(key)?.unwrap_or(default)),
        }
    }

    /// Flag > config file, with no default (returns `None` when unset).
    pub fn parsed_key<T>(&self, key: &str) -> Result<Option<T>, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.file.parsed(key)
    }
}

/// Stage a command's failures (including settings errors) belong to.
fn command_stage(command: &Command) -> Stage {
    match command {
        Command::Fetch(_) => Stage::Fetch,
        Command::Detect(_) => Stage::Detect,
        Command::Encode(_) => Stage::Encode,
        Command::Train(_) => Stage::Train,
        Command::Eval(_) | Command::NoiseSweep(_) | Command::Online(_) => Stage::Eval,
        // The pipeline starts by loading records, i.e. in the detect stage.
        Command::Pipeline(_) => Stage::Detect,
    }
}

/// Hex SHA-256 of a settings struct's canonical JSON form.
///
/// Field order is fixed by the struct definition, so the hash changes
/// exactly when a semantic field changes.
pub fn config_hash<T: serde::Serialize>(settings: &T) -> String {
    let json = serde_json::to_string(settings).expect("settings structs always serialize");
    sha256_hex(json.as_bytes())
}

/// Hex SHA-256 of raw bytes; used to fold input-file content into stamps.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Parses comma-separated hidden-layer widths, e.g. `256` or `300,100`.
pub fn parse_hidden(text: &str) -> Result<Vec<usize>, String> {
    let widths: Result<Vec<usize>, _> = text
        .split(',')
        .map(|part| part.trim().parse::<usize>())
        .collect();
    let widths = widths.map_err(|e| format!("bad hidden layout `{text}`: {e}"))?;
    if widths.is_empty() || widths.contains(&0) {
        return Err(format!("bad hidden layout `{text}`: widths must be positive"));
    }
    Ok(widths)
}

/// Parses an SNR spec: either a comma list (`0,6,12`) or an inclusive
/// `start:stop:step` range (`0:20:2`).
pub fn parse_snr_spec(text: &str) -> Result<Vec<f64>, String> {
    let bad = |why: &str| format!("bad SNR spec `{text}`: {why}");
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("ranges are start:stop:step"));
        }
        let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
        let nums = nums.map_err(|e| bad(&e.to_string()))?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !step.is_finite() || step <= 0.0 {
            return Err(bad("step must be positive"));
        }
        if stop < start {
            return Err(bad("stop must not be below start"));
        }
        let mut values = Vec::new();
        let mut i = 0u32;
        loop {
            let value = start + step * f64::from(i);
            if value > stop + 1e-9 {
                break;
            }
            values.push(value);
            i += 1;
        }
        Ok(values)
    } else {
        let values: Result<Vec<f64>, _> =
            text.split(',').map(|p| p.trim().parse::<f64>()).collect();
        let values = values.map_err(|e| bad(&e.to_string()))?;
        if values.is_empty() {
            return Err(bad("empty list"));
        }
        Ok(values)
    }
}

/// Training-set size when the user does not pick one: 5% of the corpus,
/// at least 200 beats, and never more than 80% of the corpus.
pub fn default_train_count(total_beats: usize) -> usize {
    let five_percent = total_beats / 20;
    let desired = five_percent.max(200);
    desired.min(total_beats * 4 / 5).max(1)
}
