//! Experiment runner for the `qtorus` library.
//!
//! Each subcommand resolves an [`ExperimentConfig`], runs its rows on a rayon
//! pool with per-row seeds split from the run seed, and writes a result table
//! plus a manifest. Exit status: 0 when every check passes, 1 when a check
//! fails, 2 for configuration errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::cli::{Cli, Command, Common};
pub use crate::config::ExperimentConfig;
pub use crate::report::{CliError, Report};

type Runner = fn(&ExperimentConfig) -> Result<Report, CliError>;

fn flags<A: Serialize>(args: &A, common: &Common) -> (Option<PathBuf>, Value) {
    (common.config.clone(), serde_json::to_value(args).expect("serializable"))
}

/// Runs one invocation. `Ok(true)` when every check passed.
pub fn execute(cli: Cli) -> Result<bool, CliError> {
    let ((path, overlay), run): ((Option<PathBuf>, Value), Runner) = match &cli.command {
        Command::Converge(a) => (flags(a, &a.common), commands::converge),
        Command::Kernel(a) => (flags(a, &a.common), commands::kernel),
        Command::BrCheck(a) => (flags(a, &a.common), commands::br_check),
        Command::SteinSweep(a) => (flags(a, &a.common), commands::stein_sweep),
        Command::SchurCheck(a) => (flags(a, &a.common), commands::schur_check),
        Command::Anticommute(a) => (flags(a, &a.common), commands::anticommute),
        Command::Hardy(a) => (flags(a, &a.common), commands::hardy),
        Command::Bmo(a) => (flags(a, &a.common), commands::bmo),
        Command::Garsia(a) => (flags(a, &a.common), commands::garsia),
        Command::Lusin(a) => (flags(a, &a.common), commands::lusin),
        Command::Folner(a) => (flags(a, &a.common), commands::folner),
        Command::Duality(a) => (flags(a, &a.common), commands::duality),
    };
    let cfg = ExperimentConfig::load(path.as_deref(), overlay)?;
    let start = Instant::now();
    let report = match cfg.threads()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(|| run(&cfg)),
        None => run(&cfg),
    }?
    .with_row_check();
    report.emit(&cfg, cfg.out.as_deref(), start.elapsed().as_secs_f64())?;
    Ok(report.passed())
}
