use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "vqmc", version, about = "Recoverability checks for four-qubit states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a built-in state in the JSON state format.
    State(StateArgs),
    /// Kernel-inclusion test on the conditional blocks of a marginal.
    Inclusion(InclusionArgs),
    /// Solve for a CPTP recovery channel or the minimal HPTP overhead.
    Certify(CertifyArgs),
    /// Run inclusion, CPTP and HPTP checks over a parameter grid.
    Sweep(SweepArgs),
    /// Scripted end-to-end scenarios.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Builtin {
    W4,
    Ghz4,
    Mix,
    Rho2,
    Ghz3,
    ConvexMix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Cptp,
    Hptp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    Mix,
    ConvexMix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum DemoName {
    Nonconvexity,
    TwoQubitRecovery,
    AppendChannel,
}

/// Mixing parameters for `MIX` and `CONVEX_MIX`.
#[derive(Debug, Clone, Args)]
pub struct Params {
    /// Weight of W4 in MIX.
    #[arg(long)]
    pub p: Option<f64>,
    /// Weight of W4 in CONVEX_MIX.
    #[arg(long)]
    pub lambda: Option<f64>,
}

/// Where the state comes from: a built-in or a JSON file.
#[derive(Debug, Clone, Args)]
pub struct StateInput {
    #[arg(long, value_enum, ignore_case = true, conflicts_with = "path", required_unless_present = "path")]
    pub builtin: Option<Builtin>,
    /// JSON state file.
    pub path: Option<PathBuf>,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Print a human-readable table instead of JSON.
    #[arg(long)]
    pub pretty: bool,
    /// Include intermediate matrices in the report.
    #[arg(long)]
    pub verbose: bool,
    /// Also write the JSON report to this path (relative paths resolve
    /// against `VQMC_OUT_DIR` when set).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Iteration budget shared by both solver phases [default: 50000]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Largest constraint residual accepted as feasible [default: 1e-7]
    #[arg(long)]
    pub eps_feas: Option<f64>,
    /// Stationary residual above which a problem is infeasible [default: 1e-5]
    #[arg(long)]
    pub eps_infeasible: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    #[arg(value_enum, ignore_case = true)]
    pub name: Builtin,
    #[command(flatten)]
    pub params: Params,
    /// Output file; the state is printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct InclusionArgs {
    #[command(flatten)]
    pub input: StateInput,
    /// Leak tolerance for the subspace containment test.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub input: StateInput,
    #[arg(long, value_enum, default_value = "cptp")]
    pub mode: Mode,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, ignore_case = true, default_value = "MIX")]
    pub family: Family,
    /// `start:stop:count`, endpoints included.
    #[arg(long, default_value = "0:1:21")]
    pub grid: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(value_enum)]
    pub name: DemoName,
    /// Mixing weight of the nonconvexity midpoint.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: Output,
}
