//! Constrained minimisation of discrete p-energies.
//!
//! Three interchangeable algorithms share one problem representation:
//! damped Newton with projected preconditioned conjugate gradients (the
//! default), nonlinear Gauss–Seidel for fixed-value constraints, and
//! projected gradient descent. For `p < 2` all of them minimise the smoothed
//! potential `(t² + ε²)^{p/2} - ε^p` with `ε` halved from
//! `smoothing_eps` down to `smoothing_floor`.

mod gauss_seidel;
mod newton;
mod oracle;
mod problem;
mod projected;
mod rayleigh;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{check_exponent, energy_of, GraphFunction};
use crate::error::{CarpetError, Result};
use crate::graphs::Graph;

pub use oracle::harmonic_oracle;
pub use rayleigh::{oscillation, rayleigh_max, rayleigh_quotient, RayleighReport};

use problem::Problem;

/// Weighted mean of `f` over `vertices` must equal `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanConstraint {
    pub vertices: Vec<u32>,
    pub weights: Vec<f64>,
    pub target: f64,
}

impl MeanConstraint {
    /// Uniformly weighted mean.
    pub fn uniform(vertices: Vec<u32>, target: f64) -> Self {
        let weights = vec![1.0; vertices.len()];
        MeanConstraint {
            vertices,
            weights,
            target,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub dirichlet: BTreeMap<u32, f64>,
    pub mean_constraints: Vec<MeanConstraint>,
    pub zero_set: Vec<u32>,
}

impl ConstraintSpec {
    /// `f = 1` on `a` and `f = 0` on `b`.
    pub fn two_sets(a: &[u32], b: &[u32]) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(CarpetError::InvalidArgument("sets must be nonempty".into()));
        }
        let mut dirichlet = BTreeMap::new();
        for &v in a {
            dirichlet.insert(v, 1.0);
        }
        for &v in b {
            if dirichlet.insert(v, 0.0).is_some() {
                return Err(CarpetError::InvalidArgument(format!("vertex {v} lies in both sets")));
            }
        }
        Ok(ConstraintSpec {
            dirichlet,
            ..ConstraintSpec::default()
        })
    }

    fn is_empty(&self) -> bool {
        self.dirichlet.is_empty() && self.mean_constraints.is_empty() && self.zero_set.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Newton,
    GaussSeidel,
    ProjectedGradient,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// BFS-distance interpolation of fixed data, then projection onto the
    /// mean constraints.
    #[default]
    Interpolate,
    /// Seeded uniform values in the hull of the fixed data.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol_energy_rel: f64,
    pub tol_kkt: f64,
    /// Iteration cap (Newton steps, sweeps or gradient steps).
    pub max_sweeps: usize,
    pub smoothing_eps: f64,
    pub smoothing_floor: f64,
    pub seed: u64,
    pub restarts: usize,
    pub method: Method,
    pub init: Init,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_energy_rel: 1e-10,
            tol_kkt: 1e-8,
            max_sweeps: 100_000,
            smoothing_eps: 1e-3,
            smoothing_floor: 1e-12,
            seed: 0,
            restarts: 8,
            method: Method::Newton,
            init: Init::Interpolate,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        let positive = [
            self.tol_energy_rel,
            self.tol_kkt,
            self.smoothing_eps,
            self.smoothing_floor,
        ];
        if positive.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(())
        } else {
            Err(CarpetError::InvalidArgument("tolerances must be positive".into()))
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub minimizer: GraphFunction,
    /// Exact (unsmoothed) p-energy of the minimizer.
    pub energy: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    /// Residual the run had to reach: `tol_kkt`, raised to the rounding floor
    /// of the gradient when the smoothed Hessian is very stiff.
    pub kkt_tolerance: f64,
    pub converged: bool,
    pub wall_ms: u64,
    pub options_echo: SolverOptions,
}

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    #[allow(dead_code)]
    pub objective: f64,
    pub iterations: usize,
    pub kkt: f64,
    pub kkt_tolerance: f64,
    #[allow(dead_code)]
    pub rel_decrease: f64,
    pub converged: bool,
}

fn random_start(problem: &Problem, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = problem.fixed.iter().flatten().copied().collect();
    let (lo, hi) = if data.is_empty() {
        (0.0, 1.0)
    } else {
        let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo { (lo, hi) } else { (lo - 1.0, lo + 1.0) }
    };
    let mut x: Vec<f64> = (0..problem.n()).map(|_| rng.gen_range(lo..hi)).collect();
    problem.make_feasible(&mut x);
    x
}

/// General entry point: minimises `E_p` under `spec`, optionally from a
/// given starting vector.
pub fn solve(g: &Graph, spec: &ConstraintSpec, p: f64, opts: &SolverOptions, start: Option<Vec<f64>>) -> Result<SolveReport> {
    check_exponent(p)?;
    opts.validate()?;
    if spec.is_empty() {
        return Err(CarpetError::InvalidArgument("at least one constraint is required".into()));
    }
    let clock = Instant::now();
    let problem = Problem::new(g, spec, p, None)?;
    let x0 = match start {
        Some(x) => {
            if x.len() != g.vertex_count() {
                return Err(CarpetError::Misaligned("starting vector length".into()));
            }
            x
        }
        None => match opts.init {
            Init::Interpolate => problem.interpolated_start(),
            Init::Random => random_start(&problem, opts.seed),
        },
    };
    let out = match opts.method {
        Method::Newton => newton::minimize(&problem, x0, opts)?,
        Method::GaussSeidel => gauss_seidel::minimize(&problem, x0, opts)?,
        Method::ProjectedGradient => projected::minimize(&problem, x0, opts)?,
    };
    let energy = energy_of(g, &out.x, p);
    Ok(SolveReport {
        minimizer: GraphFunction::new(g, out.x)?,
        energy,
        iterations: out.iterations,
        kkt_residual: out.kkt,
        kkt_tolerance: out.kkt_tolerance,
        converged: out.converged,
        wall_ms: clock.elapsed().as_millis() as u64,
        options_echo: opts.clone(),
    })
}


/// Minimiser of `E_p` with prescribed values on the Dirichlet set.
pub fn solve_dirichlet(g: &Graph, spec: &ConstraintSpec, p: f64, opts: &SolverOptions) -> Result<SolveReport> {
    if spec.dirichlet.is_empty() || !spec.mean_constraints.is_empty() || !spec.zero_set.is_empty() {
        return Err(CarpetError::InvalidArgument(
            "a Dirichlet problem takes a nonempty set of fixed values only".into(),
        ));
    }
    solve(g, spec, p, opts, None)
}

/// Minimiser of `E_p` under mean constraints and an optional zero set.
pub fn solve_mean_constrained(g: &Graph, spec: &ConstraintSpec, p: f64, opts: &SolverOptions) -> Result<SolveReport> {
    if spec.mean_constraints.is_empty() {
        return Err(CarpetError::InvalidArgument("no mean constraint given".into()));
    }
    solve(g, spec, p, opts, None)
}

/// Minimiser for the conductance problem between `a` and `b`.
pub fn conductance_report(g: &Graph, a: &[u32], b: &[u32], p: f64, opts: &SolverOptions) -> Result<SolveReport> {
    let spec = ConstraintSpec::two_sets(a, b)?;
    solve_dirichlet(g, &spec, p, opts)
}

/// `C_p(A, B) = min { E_p(f) : f = 1 on A, f = 0 on B }`.
pub fn conductance(g: &Graph, a: &[u32], b: &[u32], p: f64, opts: &SolverOptions) -> Result<f64> {
    let report = conductance_report(g, a, b, p, opts)?;
    if !report.converged {
        return Err(CarpetError::NotConverged(format!(
            "conductance solve stopped with KKT residual {:.3e}",
            report.kkt_residual
        )));
    }
    Ok(report.energy)
}
