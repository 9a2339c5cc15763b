//! Command-line surface. Each argument struct serializes to the keys of
//! [`ExperimentConfig`](crate::config::ExperimentConfig), so flags overlay the
//! config file key by key.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{ElementKind, Format, MethodName, ThetaPreset};

#[derive(Debug, Parser)]
#[command(name = "qtorus", version, about = "Harmonic analysis experiments on quantum tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean-convergence table of a summation method along a schedule.
    Converge(ConvergeArgs),
    /// Circular Poisson kernel by its Fourier and lattice paths.
    Kernel(KernelArgs),
    /// Bochner-Riesz recurrence identity on a v-grid.
    BrCheck(BrCheckArgs),
    /// Bochner-Riesz errors across exponents and orders.
    SteinSweep(SteinArgs),
    /// Fourier-Schur identity on random draws.
    SchurCheck(SchurArgs),
    /// Anticommuting generators: identity and norm bounds.
    Anticommute(AnticommuteArgs),
    /// Column, row and mixed Hardy norms.
    Hardy(HardyArgs),
    /// BMO norms in both forms along an r-grid.
    Bmo(BmoArgs),
    /// Equivalence of the two BMO forms and the convexity inequality.
    Garsia(BmoArgs),
    /// Conical against vertical square function (experimental).
    Lusin(LusinArgs),
    /// Følner compression of monomials against the rational overlap.
    Folner(FolnerArgs),
    /// Empirical H₁-BMO pairing ratios (experimental).
    Duality(DualityArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// JSON config; flags take precedence over its keys.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Directory for the result file and manifest.json (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for row execution.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct ElementArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_enum)]
    pub theta: Option<ThetaPreset>,
    #[arg(long, value_enum)]
    pub element: Option<ElementKind>,
    /// Random element of this degree (implies `--element random`).
    #[arg(long)]
    pub degree: Option<u32>,
    #[arg(long)]
    pub density: Option<f64>,
    /// Radius of the Følner box used for matrix norms.
    #[arg(long)]
    pub n_rep: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvergeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub element: ElementArgs,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Bochner-Riesz order.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated N, r, R, t or ε values.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub r_grid: Option<Vec<f64>>,
    /// Random points per r.
    #[arg(long)]
    pub points: Option<usize>,
    /// Combined truncation bound of the two paths.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct BrCheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Real part of β.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_im: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Number of equispaced v in [0, 1].
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SteinArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub element: ElementArgs,
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
    /// Final Bochner-Riesz radius R.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SchurArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Truncation radius (drawn from 1..=4 per trial when absent).
    #[arg(long = "N")]
    pub n: Option<u32>,
    /// Dimension (drawn from 1..=3 per trial when absent).
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct AnticommuteArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "N")]
    pub n: Option<u32>,
    /// Number of generators (drawn from {2, 3} per trial when absent).
    #[arg(long = "K")]
    pub k: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct HardyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub element: ElementArgs,
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
pub struct BmoArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub element: ElementArgs,
    #[arg(long, value_delimiter = ',')]
    pub r_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
pub struct LusinArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub element: ElementArgs,
    /// Cone aperture.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub layers: Option<usize>,
    /// Geometric ratio of the ε-layers.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub max_evals: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct FolnerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_enum)]
    pub theta: Option<ThetaPreset>,
    /// Comma-separated box radii N.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
pub struct DualityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub element: ElementArgs,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub r_grid: Option<Vec<f64>>,
}
