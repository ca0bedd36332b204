//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "metastable", version, about = "Metastable hierarchies, rate functionals and Dirichlet-form checks")]
pub struct Cli {
    /// Output path; `-` writes to standard output.
    #[arg(long, global = true, default_value = "-")]
    pub out: String,
    /// Output format; defaults to csv for `.csv` paths and json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Omit wall-clock fields so that identical runs give identical bytes.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical points and landscape graph of a potential, or a validated
    /// graph file echoed back.
    Analyze(AnalyzeArgs),
    /// Hierarchy of metastable sets, depths and reduced chains.
    Tree(TreeArgs),
    /// All orders of the rate-functional expansion for one measure.
    Gamma(GammaArgs),
    /// Dirichlet-form sweeps over decreasing temperatures.
    ///
    /// CSV columns: scenario,eps,value,target,rel_err,grid_n,runtime_ms.
    Verify(VerifyArgs),
    /// Euler-Maruyama exit statistics and occupation histograms.
    Simulate(SimulateArgs),
    /// Classes, Donsker-Varadhan rates and trace processes of a chain file.
    Chain(ChainArgs),
}

/// A potential spec (path or `builtin:NAME`) or a landscape graph file.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct LandscapeSource {
    /// Potential spec file, or `builtin:NAME`.
    #[arg(long)]
    pub potential: Option<String>,
    /// Landscape graph file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: LandscapeSource,
    /// Newton seeds per axis for the critical-point search.
    #[arg(long)]
    pub seeds: Option<usize>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "tree_source")]
pub struct TreeSource {
    /// Potential spec file, or `builtin:NAME`.
    #[arg(long)]
    pub potential: Option<String>,
    /// Landscape graph file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Previously written hierarchy file (checked as stored).
    #[arg(long)]
    pub hierarchy: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[command(flatten)]
    pub source: TreeSource,
    /// Run the structural invariant suite; exit 1 on any failure.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    #[command(flatten)]
    pub source: LandscapeSource,
    /// Measure file.
    #[arg(long)]
    pub measure: PathBuf,
    /// Report this order separately.
    #[arg(long)]
    pub level: Option<usize>,
    /// Temperatures for the leading-order reconstruction.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.02")]
    pub eps_list: Vec<f64>,
    /// Snap radius for atoms and weight ratios.
    #[arg(long, default_value_t = metastable_core::gamma::MATCH_TOL)]
    pub match_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Potential spec file, or `builtin:NAME`.
    #[arg(long, default_value = "builtin:double_well")]
    pub potential: String,
    /// Temperatures, in decreasing order.
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    /// Quadrature nodes per axis.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Replacement box, e.g. `-2:2` or `-2:2,-1.5:1.5`.
    #[arg(long = "box")]
    pub bounds: Option<String>,
    /// Largest accepted relative error at the smallest temperature.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(subcommand)]
    pub scenario: VerifyScenario,
}

#[derive(Debug, Subcommand)]
pub enum VerifyScenario {
    /// Measure concentrating at a point; target `¼|∇U(x0)|²`.
    Premeta {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Vec<f64>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Measure on the intermediate scale at a critical point; target is the
    /// sum of the negative Hessian eigenvalues in absolute value.
    Critical {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
        /// Cutoff radius exponent, in (1/3, 1/2).
        #[arg(long, default_value_t = 0.4)]
        delta_exp: f64,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Rescaled energy of the saddle profile; target `ω(σ)/ν⋆`.
    Capacity {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        saddle: Vec<f64>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Rescaled energy of the metastable-scale measure; target is the
    /// reduced chain's rate of `omega`.
    Metastable {
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Communicating class of the level's chain.
        #[arg(long, default_value_t = 0)]
        class: usize,
        /// Weights on the class's sets; defaults to all mass on the first.
        #[arg(long, value_delimiter = ',')]
        omega: Option<Vec<f64>>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Potential spec file, or `builtin:NAME`.
    #[arg(long, default_value = "builtin:double_well")]
    pub potential: String,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Horizon of every replica.
    #[arg(long = "T", default_value_t = 20_000.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 200)]
    pub replicas: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Minimum id whose metastable set the replicas start from.
    #[arg(long)]
    pub start: String,
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    /// Valley depth `r₀`; defaults to 0.4 times the first depth.
    #[arg(long)]
    pub valley_depth: Option<f64>,
    /// Also pool long runs into this many histogram bins per axis.
    #[arg(long)]
    pub histogram_bins: Option<usize>,
    /// Horizon of each histogram replica.
    #[arg(long, default_value_t = 2_000.0)]
    pub histogram_horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DvChoice {
    Decomposed,
    Sup,
    Both,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Chain file.
    #[arg(long)]
    pub chain: PathBuf,
    /// Weights file for the Donsker-Varadhan rate.
    #[arg(long)]
    pub dv: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    pub method: DvChoice,
    /// States (names or indices) to trace onto.
    #[arg(long, value_delimiter = ',')]
    pub trace: Option<Vec<String>>,
    /// Report communicating classes and their stationary laws.
    #[arg(long)]
    pub classes: bool,
}
