// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Declarative experiment runner for `qntk-core`.
//!
//! A JSON config names the experiment; the runner draws seeded ensembles in
//! parallel and writes CSV and JSON artifacts whose bytes depend only on the
//! config and seed.

pub mod config;
pub mod output;
pub mod runners;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use runners::{run, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_ALL_DIVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qntk", version, about = "Quantum neural tangent kernel experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ensemble statistics of the kernel and meta-kernel over random circuits.
    QntkStats(RunArgs),
    /// Gradient-descent trajectories with per-trial decay fits.
    Train(RunArgs),
    /// Multi-sample supervised training on basis-state features.
    TrainSupervised(RunArgs),
    /// Lowest eigenvalue of the supervised kernel against training-set size.
    EigenScan(RunArgs),
    /// Monte Carlo checks of Haar moment identities.
    HaarCheck(RunArgs),
    /// Fitted decay rates per trial against theory.
    DecayFit(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed; overrides the config value.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides the config value.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to all available cores.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

impl Command {
    fn parts(&self) -> (ExperimentKind, &RunArgs) {
        match self {
            Command::QntkStats(a) => (ExperimentKind::QntkStats, a),
            Command::Train(a) => (ExperimentKind::Train, a),
            Command::TrainSupervised(a) => (ExperimentKind::TrainSupervised, a),
            Command::EigenScan(a) => (ExperimentKind::EigenScan, a),
            Command::HaarCheck(a) => (ExperimentKind::HaarCheck, a),
            Command::DecayFit(a) => (ExperimentKind::DecayFit, a),
        }
    }
}

/// Loads the config named by `args`, applies the seed override, and checks
/// it against the subcommand.
pub fn load_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, String> {
    let path = args.config.display();
    let text = fs::read_to_string(&args.config).map_err(|e| format!("{path}: {e}"))?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(|e| format!("{path}: {e}"))?;
    if cfg.experiment != kind {
        return Err(format!("{path}: config is for `{}` but the subcommand is `{kind}`", cfg.experiment));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Parses `argv`, runs the experiment and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let (kind, args) = cli.command.parts();
    let cfg = match load_config(kind, args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_VALIDATION;
        }
    };
    let out = cfg.output_dir(Some(&args.config), args.out.as_deref());
    match run(&cfg, &out, args.threads.map(|t| t as usize)) {
        Ok(Status::Success) => EXIT_OK,
        Ok(Status::ChecksFailed) => {
            eprintln!("error: one or more identity checks failed; see {}", out.join("report.json").display());
            EXIT_CHECK_FAILED
        }
        Ok(Status::AllDiverged) => {
            eprintln!("error: every trial diverged");
            EXIT_ALL_DIVERGED
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_VALIDATION
        }
    }
}
