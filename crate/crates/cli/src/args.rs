use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "shmod", version, about = "Reduced collapse dynamics of the critical Schrödinger-Helmholtz equation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Flat JSON file of parameters; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Constants snapshot to read or create (default: <out>/constants.json).
    #[arg(long, global = true)]
    pub constants: Option<PathBuf>,
    /// Ignore an existing snapshot and solve again.
    #[arg(long, global = true)]
    pub recompute_constants: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the ground-state profile and write it out.
    Townes(SolitonArgs),
    /// Compute the profile functionals and their dual-form checks.
    Constants(SolitonArgs),
    /// Integrate the reduced equations.
    Simulate(ModelCmd),
    /// Predict the fate of a trajectory from its initial data.
    Classify(ModelCmd),
    /// Bisect the second-order collapse threshold in dL/dt(0).
    Threshold(ThresholdCmd),
    /// Tabulate exact and truncated f1 against alpha/L.
    #[command(name = "f1-table")]
    F1Table(F1TableCmd),
    /// Simulate every point of a Cartesian parameter grid.
    Sweep(SweepCmd),
}

#[derive(Debug, Default, Clone, Args, Serialize)]
pub struct SolitonArgs {
    #[arg(long = "r-max")]
    #[serde(rename = "r-max", skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[arg(long = "grid-step")]
    #[serde(rename = "grid-step", skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[arg(long = "shoot-tol")]
    #[serde(rename = "shoot-tol", skip_serializing_if = "Option::is_none")]
    pub shoot_tol: Option<f64>,
    #[arg(long = "bracket-lo", allow_negative_numbers = true)]
    #[serde(rename = "bracket-lo", skip_serializing_if = "Option::is_none")]
    pub bracket_lo: Option<f64>,
    #[arg(long = "bracket-hi", allow_negative_numbers = true)]
    #[serde(rename = "bracket-hi", skip_serializing_if = "Option::is_none")]
    pub bracket_hi: Option<f64>,
    #[arg(long = "max-iter")]
    #[serde(rename = "max-iter", skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Default, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// unperturbed, o1, o2, o3 or exact.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[arg(long = "L0")]
    #[serde(rename = "L0", skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    #[arg(long = "dLt0", allow_negative_numbers = true)]
    #[serde(rename = "dLt0", skip_serializing_if = "Option::is_none")]
    pub dlt0: Option<f64>,
    /// Initial beta for the unperturbed model.
    #[arg(long = "beta-init", allow_negative_numbers = true)]
    #[serde(rename = "beta-init", skip_serializing_if = "Option::is_none")]
    pub beta_init: Option<f64>,
    /// Enable the radiation loss term of the unperturbed model.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<bool>,
}

#[derive(Debug, Default, Clone, Args, Serialize)]
pub struct StepArgs {
    #[arg(long = "t-max")]
    #[serde(rename = "t-max", skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[arg(long = "rel-tol")]
    #[serde(rename = "rel-tol", skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[arg(long = "abs-tol")]
    #[serde(rename = "abs-tol", skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    /// Smallest step as a fraction of the horizon.
    #[arg(long = "h-min-factor")]
    #[serde(rename = "h-min-factor", skip_serializing_if = "Option::is_none")]
    pub h_min_factor: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelCmd {
    /// Figure recipe name, or `all` (simulate only).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub step: StepArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub soliton: SolitonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdCmd {
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[arg(long = "L0")]
    #[serde(rename = "L0", skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    /// alpha / L(0) instead of L0.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    /// Place alpha / L(0) at `r-low-half` or `mid-band`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<String>,
    #[arg(long = "dLt0-lo", allow_negative_numbers = true)]
    #[serde(rename = "dLt0-lo", skip_serializing_if = "Option::is_none")]
    pub dlt0_lo: Option<f64>,
    #[arg(long = "dLt0-hi", allow_negative_numbers = true)]
    #[serde(rename = "dLt0-hi", skip_serializing_if = "Option::is_none")]
    pub dlt0_hi: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub step: StepArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub soliton: SolitonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct F1TableCmd {
    /// Comma-separated values of alpha / L.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub soliton: SolitonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepCmd {
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta0: Option<Vec<f64>>,
    #[arg(long = "L0", value_delimiter = ',')]
    #[serde(rename = "L0", skip_serializing_if = "Option::is_none")]
    pub l0: Option<Vec<f64>>,
    #[arg(long = "dLt0", value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(rename = "dLt0", skip_serializing_if = "Option::is_none")]
    pub dlt0: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub step: StepArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub soliton: SolitonArgs,
}
