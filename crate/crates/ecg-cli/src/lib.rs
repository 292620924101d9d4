//! Command-line front end for the ECG heartbeat-classification pipeline.
//!
//! The binary wires the library stages together in two ways:
//!
//! * **offline** — `fetch` → `detect` → `encode` → `train` → `eval`, either
//!   as individual commands passing files between them or in one shot via
//!   `pipeline`, which also splits the encoded beats into train/test sets;
//! * **online** — `online` streams one record through detection, encoding,
//!   and classification, timing each stage per beat.
//!
//! Conventions shared by every command:
//!
//! * stdout carries data (CSV rows, file paths); diagnostics and progress
//!   go to stderr;
//! * failures exit with a stable per-stage code ([`Stage::exit_code`]);
//! * every run resolves to an explicit settings struct whose SHA-256 hash
//!   is stamped into the artifacts it writes, so outputs can be traced back
//!   to the exact configuration — and reruns with the same configuration
//!   and seed produce byte-identical files.

pub mod args;
pub mod commands;
pub mod config;
pub mod data;
pub mod report;

use std::fmt;

/// Pipeline stage an error is attributed to; each maps to a stable process
/// exit code so shell callers can tell failures apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Fetch,
    Detect,
    Encode,
    Train,
    Eval,
}

impl Stage {
    /// The process exit code for failures in this stage.
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Fetch => 2,
            Stage::Detect => 3,
            Stage::Encode => 4,
            Stage::Train => 5,
            Stage::Eval => 6,
        }
    }
}

/// A command failure: which stage broke, and a human-readable explanation.
///
/// Configuration problems are attributed to the stage that was about to
/// run, so `train --config broken.cfg` still exits with the train code.
#[derive(Debug)]
pub struct CliError {
    pub stage: Stage,
    pub message: String,
}

impl CliError {
    pub fn new(stage: Stage, message: impl Into<String>) -> CliError {
        CliError { stage, message: message.into() }
    }

    /// Adapter for `map_err`: tags any displayable error with a stage.
    pub fn at<E: fmt::Display>(stage: Stage) -> impl Fn(E) -> CliError {
        move |e| CliError::new(stage, e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.message.fmt(f)
    }
}

impl std::error::Error for CliError {}

/// Runs one parsed command line to completion.
pub fn run(cli: &args::Cli) -> Result<(), CliError> {
    let ctx = config::Context::resolve(cli)?;
    match &cli.command {
        args::Command::Fetch(a) => commands::fetch::run(&ctx, a),
        args::Command::Detect(a) => commands::detect::run(&ctx, a),
        args::Command::Encode(a) => commands::encode::run(&ctx, a),
        args::Command::Train(a) => commands::train::run(&ctx, a),
        args::Command::Eval(a) => commands::eval::run(&ctx, a),
        args::Command::NoiseSweep(a) => commands::sweep::run(&ctx, a),
        args::Command::Online(a) => commands::online::run(&ctx, a),
        args::Command::Pipeline(a) => commands::pipeline::run(&ctx, a),
    }
}
