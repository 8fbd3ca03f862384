use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "thermoflow", version, about = "Temperature-controlled st-flows and flow centralities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal flow between two nodes: edge CSV, optional DOT and diagnostics.
    Flow(FlowArgs),
    /// All-pairs mean flow, relative mean flow, net flow and closeness tables.
    Centrality(CentralityArgs),
    /// Expected trip length as a function of beta.
    Abacus(AbacusArgs),
    /// Estimate the temperature from an observed flow or trip length.
    Calibrate(CalibrateArgs),
    /// Correlation of node net-flow centrality across a beta sweep.
    Correlate(CorrelateArgs),
    /// Write a graph as JSON, or list its node layout with --describe.
    Generate(GenerateArgs),
    /// Compare the solver against the reference implementations.
    #[command(hide = true)]
    Crosscheck(CrosscheckArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph file (.json or .csv) or builtin: A, B, C, grid:MxM, path:N, cliques:K.
    #[arg(long)]
    pub graph: String,
}

#[derive(Debug, Args)]
pub struct EndpointArgs {
    /// Source node (defaults to the builtin's source).
    #[arg(long)]
    pub s: Option<usize>,
    /// Target node (defaults to the builtin's target).
    #[arg(long)]
    pub t: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    /// Cost exponent p of phi(x) = x^p.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Accept 0 < p < 1 (the optimum need not be unique).
    #[arg(long)]
    pub allow_sub_unit: bool,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub endpoints: EndpointArgs,
    #[arg(long)]
    pub beta: f64,
    #[command(flatten)]
    pub exponent: ExponentArgs,
    /// Edge CSV (`i,j,x,net`); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// DOT file shaded by flow.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Diagnostics JSON.
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CentralityArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub beta: f64,
    #[command(flatten)]
    pub exponent: ExponentArgs,
    /// Edge table CSV; stdout when omitted.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Node table CSV.
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    /// DOT file shaded by mean net flow.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Comma-separated betas, or `log:LO:HI:N` (default log:0.001:50:40).
    #[arg(long)]
    pub betas: Option<String>,
}

#[derive(Debug, Args)]
pub struct AbacusArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub endpoints: EndpointArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// `beta,total_time` CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub endpoints: EndpointArgs,
    /// Observed flow as an `i,j,x` CSV (extra columns ignored).
    #[arg(long, conflicts_with = "time", required_unless_present = "time")]
    pub flow: Option<PathBuf>,
    /// Observed trip length, inverted on the abacus.
    #[arg(long)]
    pub time: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Report JSON; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// `beta,corr0,corr_inf,sum` CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Print the node layout instead of JSON.
    #[arg(long)]
    pub describe: bool,
    /// Graph JSON; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrosscheckArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub endpoints: EndpointArgs,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 100_000)]
    pub walks: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
