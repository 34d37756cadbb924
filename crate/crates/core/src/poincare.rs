//! The (p,p)-Poincaré constants `λ_p^{(n)}`, `λ_{*,p}^{(n)}` and `σ_p^{(n)}`
//! on cell graphs, with the uniform measure `8^{-n}` per cell.

use serde::{Deserialize, Serialize};

use crate::carpet::Word;
use crate::energy::{energy_of, GraphFunction};
use crate::error::{CarpetError, Result};
use crate::graphs::{build_cell_graph, restrict_subgraph, CarpetGraph, CellAdjacency, CellGraph};
use crate::scaling::{conductance_lr, GraphFamily};
use crate::solver::{rayleigh_max, solve_mean_constrained, ConstraintSpec, MeanConstraint, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoincareKind {
    Lambda,
    LambdaStar,
    Sigma,
}

impl std::str::FromStr for PoincareKind {
    type Err = CarpetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(PoincareKind::Lambda),
            "lambda-star" | "lambda_star" => Ok(PoincareKind::LambdaStar),
            "sigma" => Ok(PoincareKind::Sigma),
            _ => Err(CarpetError::InvalidArgument(format!("unknown Poincaré constant {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoincareResult {
    pub kind: PoincareKind,
    pub n: usize,
    pub p: f64,
    pub value: f64,
    /// Minimizer (`λ_*`, `σ`) or best ascent iterate (`λ`).
    pub certificate: GraphFunction,
    pub is_lower_bound: bool,
    pub converged: bool,
    /// Random restarts used (`λ` only).
    pub restarts: usize,
}

fn from_minimizer(kind: PoincareKind, n: usize, p: f64, g: &CellGraph, spec: &ConstraintSpec, opts: &SolverOptions) -> Result<PoincareResult> {
    let report = solve_mean_constrained(g.graph(), spec, p, opts)?;
    Ok(PoincareResult {
        kind,
        n,
        p,
        value: 1.0 / report.energy,
        certificate: report.minimizer,
        is_lower_bound: false,
        converged: report.converged,
        restarts: 0,
    })
}

/// Results with `converged == false` carry the last iterate.
impl PoincareResult {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(CarpetError::NotConverged(format!("{:?} at n = {}", self.kind, self.n)))
        }
    }
}

/// `λ_{*,p}^{(n)} = 1 / min { E_p(f) : f = 0 on ∂_*G_n, <f> = 1 }`.
pub fn lambda_star(n: usize, p: f64, opts: &SolverOptions) -> Result<PoincareResult> {
    if n < 2 {
        return Err(CarpetError::InvalidLevel("boundary exhausts vertex set".into()));
    }
    let g = build_cell_graph(n, CellAdjacency::Full)?;
    let spec = ConstraintSpec {
        mean_constraints: vec![MeanConstraint::uniform(
            (0..g.graph().vertex_count() as u32).collect(),
            1.0,
        )],
        zero_set: g.subset("boundary")?.to_vec(),
        ..ConstraintSpec::default()
    };
    from_minimizer(PoincareKind::LambdaStar, n, p, &g, &spec, opts)
}

/// Induced subgraph of `G_{n+1}` on `1·W_n ∪ 8·W_n`, with the two blocks as
/// vertex ranges `0..8^n` and `8^n..2·8^n`.
pub fn sigma_graph(n: usize) -> Result<CellGraph> {
    let g = build_cell_graph(n + 1, CellAdjacency::Full)?;
    let mut vertices = g.block(&Word::new(&[1])?);
    vertices.extend(g.block(&Word::new(&[8])?));
    restrict_subgraph(&g, &vertices)
}

/// `σ_p^{(n)} = σ_p^{G_{n+1}}(1·W_n, 8·W_n)`.
pub fn sigma(n: usize, p: f64, opts: &SolverOptions) -> Result<PoincareResult> {
    let g = sigma_graph(n)?;
    let block = 1u32 << (3 * n);
    let spec = ConstraintSpec {
        mean_constraints: vec![
            MeanConstraint::uniform((0..block).collect(), 1.0),
            MeanConstraint::uniform((block..2 * block).collect(), 0.0),
        ],
        ..ConstraintSpec::default()
    };
    from_minimizer(PoincareKind::Sigma, n, p, &g, &spec, opts)
}

/// Lower bound for `λ_p^{(n)}` from the Rayleigh ascent; exact up to the
/// solver tolerance when `p = 2`.
pub fn lambda(n: usize, p: f64, opts: &SolverOptions) -> Result<PoincareResult> {
    let g = build_cell_graph(n, CellAdjacency::Full)?;
    let count = g.graph().vertex_count();
    let weights = vec![8f64.powi(-(n as i32)); count];
    let report = rayleigh_max(g.graph(), &weights, p, opts)?;
    Ok(PoincareResult {
        kind: PoincareKind::Lambda,
        n,
        p,
        value: report.value,
        certificate: report.certificate,
        is_lower_bound: p != 2.0,
        converged: report.converged,
        restarts: report.restarts,
    })
}

pub fn poincare(kind: PoincareKind, n: usize, p: f64, opts: &SolverOptions) -> Result<PoincareResult> {
    match kind {
        PoincareKind::Lambda => lambda(n, p, opts),
        PoincareKind::LambdaStar => lambda_star(n, p, opts),
        PoincareKind::Sigma => sigma(n, p, opts),
    }
}

/// `value · E_p(certificate)`, which is 1 for minimizer-based constants.
pub fn reciprocal_check(result: &PoincareResult, g: &CellGraph) -> Result<f64> {
    result.certificate.check(g.graph())?;
    Ok(result.value * energy_of(g.graph(), &result.certificate.values, result.p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationRow {
    pub n: usize,
    pub lambda: f64,
    pub lambda_star: f64,
    pub sigma: f64,
    pub conductance_lr: f64,
    pub lambda_over_sigma: f64,
    pub lambda_star_over_lambda: f64,
    pub lambda_times_conductance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub min: f64,
    pub max: f64,
    /// `max / min`.
    pub spread: f64,
}

impl Spread {
    fn of(values: impl Iterator<Item = f64>) -> Option<Spread> {
        let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        (min.is_finite() && min > 0.0).then(|| Spread {
            min,
            max,
            spread: max / min,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationTable {
    pub p: f64,
    pub rows: Vec<RelationRow>,
    pub lambda_over_sigma: Option<Spread>,
    pub lambda_star_over_lambda: Option<Spread>,
    pub lambda_times_conductance: Option<Spread>,
    /// `σ^{(n)} / λ_*^{(n+2)}` for levels where both are in the table.
    pub sigma_over_lambda_star_shifted: Vec<(usize, f64)>,
    /// Spread threshold used by the diagnostic (not a proven constant).
    pub spread_threshold: f64,
}

impl RelationTable {
    pub fn within_threshold(&self) -> bool {
        [
            &self.lambda_over_sigma,
            &self.lambda_star_over_lambda,
            &self.lambda_times_conductance,
        ]
        .iter()
        .all(|s| s.as_ref().is_some_and(|s| s.spread <= self.spread_threshold))
    }
}

pub const DEFAULT_SPREAD_THRESHOLD: f64 = 4.0;

/// All three constants and `C_p^{(n)}(L↔R)` for each `n`, with the ratios
/// whose boundedness in `n` the comparability theorems predict.
pub fn relation_table(levels: &[usize], p: f64, opts: &SolverOptions) -> Result<RelationTable> {
    let mut rows = Vec::with_capacity(levels.len());
    for &n in levels {
        let l = lambda(n, p, opts)?.require_converged()?.value;
        let ls = lambda_star(n, p, opts)?.require_converged()?.value;
        let s = sigma(n, p, opts)?.require_converged()?.value;
        let c = conductance_lr(n, p, GraphFamily::Cell, opts)?;
        rows.push(RelationRow {
            n,
            lambda: l,
            lambda_star: ls,
            sigma: s,
            conductance_lr: c,
            lambda_over_sigma: l / s,
            lambda_star_over_lambda: ls / l,
            lambda_times_conductance: l * c,
        });
    }
    let shifted = rows
        .iter()
        .filter_map(|r| {
            rows.iter()
                .find(|q| q.n == r.n + 2)
                .map(|q| (r.n, r.sigma / q.lambda_star))
        })
        .collect();
    Ok(RelationTable {
        p,
        lambda_over_sigma: Spread::of(rows.iter().map(|r| r.lambda_over_sigma)),
        lambda_star_over_lambda: Spread::of(rows.iter().map(|r| r.lambda_star_over_lambda)),
        lambda_times_conductance: Spread::of(rows.iter().map(|r| r.lambda_times_conductance)),
        sigma_over_lambda_star_shifted: shifted,
        spread_threshold: DEFAULT_SPREAD_THRESHOLD,
        rows,
    })
}
