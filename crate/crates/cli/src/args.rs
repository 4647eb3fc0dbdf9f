use clap::{Args, Parser, Subcommand};
use pointwave::evolution::Metric;
use std::path::PathBuf;

/// Standing waves of the defocusing NLS with a point interaction.
#[derive(Debug, Parser)]
#[command(name = "pointwave", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the ground state by minimization and by shooting, and cross-check them.
    Solve(SolveArgs),
    /// Least action over a list of frequencies.
    Sweep(SweepArgs),
    /// Zero-frequency tail exponent, comparison sandwich and L² threshold.
    Decay(DecayArgs),
    /// Time evolution from perturbed ground states.
    Evolve(EvolveArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Default)]
pub struct ProblemArgs {
    /// TOML or JSON run file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Space dimension, 2 or 3.
    #[arg(long)]
    pub dim: Option<u32>,
    /// Interaction strength. Defaults to the value with omega_alpha = 1.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Nonlinearity exponent.
    #[arg(long)]
    pub p: Option<f64>,
    /// Number of grid cells.
    #[arg(long)]
    pub n: Option<usize>,
    /// Outer radius of the grid.
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Grading exponent of the grid.
    #[arg(long)]
    pub grading: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Comma-separated frequencies.
    #[arg(long, value_delimiter = ',', num_args = 0..=1)]
    pub omegas: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Must be 0 when given.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Defaults to 30/omega_alpha.
    #[arg(long)]
    pub t_final: Option<f64>,
    /// H1_alpha or X0. Defaults to X0 at omega = 0 and H1_alpha otherwise.
    #[arg(long)]
    pub metric: Option<Metric>,
    /// Perturbation amplitude.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated perturbation amplitudes; overrides --delta.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long)]
    pub sponge: Option<f64>,
    /// Reference lambda of the decomposition.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Record diagnostics every this many steps.
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub solver_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
}
