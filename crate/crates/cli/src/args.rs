use std::path::PathBuf;

use carpet_core::poincare::PoincareKind;
use carpet_core::solver::{Method, SolverOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::functions::FunctionSpec;

#[derive(Debug, Parser)]
#[command(name = "carpet", version, about = "p-energies, conductances and Poincaré constants on Sierpinski carpet graphs")]
pub struct Cli {
    /// Result cache directory (default `.carpet-cache/`).
    #[arg(long, global = true, env = "CARPET_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Record wall-clock times (makes output nondeterministic).
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Graph construction.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Boundary value problems.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// One conductance value.
    Conductance(ConductanceArgs),
    /// Resistance scaling sweeps.
    #[command(subcommand)]
    Scaling(ScalingCommand),
    /// Poincaré constants.
    Poincare(PoincareArgs),
    /// Energy measures and function space diagnostics.
    #[command(subcommand)]
    Measure(MeasureCommand),
    /// Pasting experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Cache maintenance.
    #[command(subcommand)]
    Cache(CacheCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Cell,
    CellSegment,
    Point,
    PointSimple,
    Chain,
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Build a graph, print its counts and optionally write it as JSON.
    Build(GraphBuildArgs),
}

#[derive(Debug, Args)]
pub struct GraphBuildArgs {
    #[arg(long, value_enum)]
    pub kind: GraphKind,
    #[arg(long)]
    pub n: usize,
    /// Number of copies (chain only).
    #[arg(long = "M")]
    pub copies: Option<usize>,
    /// Vertex budget.
    #[arg(long, default_value_t = carpet_core::graphs::DEFAULT_VERTEX_BUDGET)]
    pub budget: u64,
    /// Graph JSON destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FixedSet {
    /// Left and right sides.
    Lr,
    /// The whole outer boundary.
    Boundary,
}

#[derive(Debug, Subcommand)]
pub enum SolveCommand {
    /// Minimise the p-energy with prescribed values on a fixed set.
    Dirichlet(DirichletArgs),
}

#[derive(Debug, Args)]
pub struct DirichletArgs {
    #[arg(long, value_enum, default_value = "cell")]
    pub kind: GraphKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "lr")]
    pub fixed: FixedSet,
    /// Function supplying the prescribed values.
    #[arg(long = "f", default_value = "coordinate-x")]
    pub function: FunctionSpec,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConductanceArgs {
    /// lr, lr-point, chain, chain-M, neighborhood-m or point-pair.
    #[arg(long, default_value = "lr")]
    pub family: String,
    /// Number of copies for the chain family.
    #[arg(long = "M")]
    pub copies: Option<usize>,
    /// Ambient depth for the neighborhood family.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ScalingCommand {
    /// Tabulate a conductance family and estimate the scaling factor.
    Rho(RhoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct RhoArgs {
    /// Comma separated exponents.
    #[arg(long, required = true, value_delimiter = ',')]
    pub p: Vec<f64>,
    #[arg(long, default_value = "lr")]
    pub family: String,
    #[arg(long = "M")]
    pub copies: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long)]
    pub n_max: usize,
    /// Slack in the `rho_hat <= 1 + tol` regime flag.
    #[arg(long, default_value_t = 0.05)]
    pub rho_tol: f64,
    /// Standard output format.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PoincareChoice {
    Lambda,
    LambdaStar,
    Sigma,
    /// All three constants and their ratios over `--n-min..=--n-max`.
    Relations,
}

impl PoincareChoice {
    pub fn single(self) -> Option<PoincareKind> {
        match self {
            PoincareChoice::Lambda => Some(PoincareKind::Lambda),
            PoincareChoice::LambdaStar => Some(PoincareKind::LambdaStar),
            PoincareChoice::Sigma => Some(PoincareKind::Sigma),
            PoincareChoice::Relations => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct PoincareArgs {
    #[arg(long, value_enum)]
    pub kind: PoincareChoice,
    #[arg(long, required_unless_present = "n_max")]
    pub n: Option<usize>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum MeasureCommand {
    /// Energy measure of a function on the point graph of level `n + m`.
    Energy(EnergyArgs),
    /// Besov-type oscillation sweep on the simple point graph of level `m`.
    Besov(BesovArgs),
    /// Chain rule discrepancies on the point graph of level `n`.
    Chainrule(ChainRuleArgs),
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(long = "f")]
    pub function: FunctionSpec,
    /// Cell level of the measure.
    #[arg(long)]
    pub n: usize,
    /// Additional refinement levels of the point graph.
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub p: f64,
    /// Rescaling factor applied per level.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BesovArgs {
    #[arg(long = "f")]
    pub function: FunctionSpec,
    /// Level of the point graph carrying the function.
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub p: f64,
    /// Comma separated exponents to tabulate.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Comma separated scales (default `1..m`).
    #[arg(long, value_delimiter = ',')]
    pub scales: Vec<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChainRuleArgs {
    #[arg(long = "f")]
    pub function: FunctionSpec,
    #[arg(long)]
    pub n: usize,
    /// Comma separated cell levels (default `1..n`).
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<usize>,
    /// identity, square, cube, sin, exp, power:K or affine:A,B.
    #[arg(long, default_value = "square")]
    pub map: String,
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Gap between the conductance and its two-step pasting prediction.
    Strictness(StrictnessArgs),
    /// The pasted function of depth `m` on the point graph of level `n`.
    Hn(HnArgs),
}

#[derive(Debug, Args)]
pub struct StrictnessArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HnArgs {
    #[arg(long)]
    pub n: usize,
    /// Pasting depth.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CacheCommand {
    /// Remove unreadable, stale and temporary cache entries.
    Gc(GcArgs),
}

#[derive(Debug, Args)]
pub struct GcArgs {
    /// Remove every entry.
    #[arg(long)]
    pub all: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Newton,
    GaussSeidel,
    ProjectedGradient,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// KKT residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "newton")]
    pub method: MethodArg,
    /// Iteration cap (Newton steps, sweeps or gradient steps).
    #[arg(long, default_value_t = SolverOptions::default().max_sweeps)]
    pub max_iter: usize,
}

impl SolverArgs {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol_kkt: self.tol,
            seed: self.seed,
            max_sweeps: self.max_iter,
            method: match self.method {
                MethodArg::Newton => Method::Newton,
                MethodArg::GaussSeidel => Method::GaussSeidel,
                MethodArg::ProjectedGradient => Method::ProjectedGradient,
            },
            ..SolverOptions::default()
        }
    }

    /// Flags in canonical form, for command strings.
    pub fn canonical(&self) -> String {
        let method = self.method.to_possible_value().expect("no skipped variants");
        format!(
            "--tol {:e} --seed {} --method {} --max-iter {}",
            self.tol,
            self.seed,
            method.get_name(),
            self.max_iter
        )
    }
}
