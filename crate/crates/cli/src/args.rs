use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Sensitivity limits for phase estimation with a fixed projective readout.
#[derive(Debug, Parser)]
#[command(name = "phasebound", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds along a grid of twisting times for the clock model.
    Sweep(SweepArgs),
    /// Gain ratio and generator coefficient at the optimal twisting time for several spin lengths.
    Scaling(ScalingArgs),
    /// Normalized coefficients of both optimal observables.
    Coeffs(CoeffsArgs),
    /// Property suite over seeded random instances.
    Verify(VerifyArgs),
    /// Single breakdown of the bounds plus entanglement witnesses.
    Bound(BoundArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    /// Human-readable report, `verify` only.
    Text,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Spin length, integer or half-integer.
    #[arg(long)]
    pub j: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Start of the window in units of τ√j.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tau_min: f64,
    /// End of the window in units of τ√j.
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 300)]
    pub tau_points: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ScalingArgs {
    /// Comma-separated spin lengths.
    #[arg(long, value_delimiter = ',', default_value = "10,15,20,25,30,35,40,45,50,55,60,65,70,75,80,85,90,95,100")]
    pub j_list: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub j: f64,
    /// Twisting time in units of τ√j; the optimal time when omitted.
    #[arg(long, allow_negative_numbers = true)]
    pub tau_scaled: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Smaller instance counts for a fast smoke run.
    #[arg(long)]
    pub quick: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long)]
    pub j: f64,
    /// Twisting time in units of τ√j.
    #[arg(long, allow_negative_numbers = true)]
    pub tau_scaled: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}
