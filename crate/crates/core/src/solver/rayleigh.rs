//! Maximisation of `Σ ν |f - <f>_ν|^p / E_p(f)` by the nonlinear inverse
//! power method: each step maximises `<s, g>` over `E_p(g) <= 1`, where `s`
//! is the gradient of the numerator at the current iterate. For convex
//! `p`-homogeneous numerator and denominator the quotient never decreases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::problem::Problem;
use super::{newton, ConstraintSpec, MeanConstraint, SolverOptions};
use crate::energy::{abs_pow, energy_of, signed_pow, CompensatedSum, GraphFunction};
use crate::error::{CarpetError, Result};
use crate::graphs::Graph;

const MAX_OUTER: usize = 500;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RayleighReport {
    /// Best quotient found; every value is attained, hence a lower bound for
    /// the supremum.
    pub value: f64,
    pub certificate: GraphFunction,
    pub restarts: usize,
    pub best_restart: usize,
    pub iterations: usize,
    pub converged: bool,
    pub is_lower_bound: bool,
}

fn weighted_mean(f: &[f64], w: &[f64]) -> f64 {
    let num: CompensatedSum = f.iter().zip(w).map(|(a, b)| a * b).collect();
    let den: CompensatedSum = w.iter().copied().collect();
    num.value() / den.value()
}

/// `Σ ν |f - <f>_ν|^p`.
pub fn oscillation(f: &[f64], weights: &[f64], p: f64) -> f64 {
    let m = weighted_mean(f, weights);
    f.iter()
        .zip(weights)
        .map(|(x, w)| w * abs_pow(x - m, p))
        .collect::<CompensatedSum>()
        .value()
}

/// Quotient of a test function; zero energy yields an error.
pub fn rayleigh_quotient(g: &Graph, f: &[f64], weights: &[f64], p: f64) -> Result<f64> {
    let e = energy_of(g, f, p);
    if !(e > 0.0) {
        return Err(CarpetError::InvalidArgument("test function has zero energy".into()));
    }
    Ok(oscillation(f, weights, p) / e)
}

fn numerator_gradient(f: &[f64], weights: &[f64], p: f64) -> Vec<f64> {
    let m = weighted_mean(f, weights);
    let total: f64 = weights.iter().sum();
    let raw: Vec<f64> = f
        .iter()
        .zip(weights)
        .map(|(x, w)| p * w * signed_pow(x - m, p))
        .collect();
    let s: f64 = raw.iter().sum();
    raw.iter().zip(weights).map(|(r, w)| r - w / total * s).collect()
}

/// Scales `f` to zero mean and unit energy; `None` for zero energy.
fn normalize(g: &Graph, f: &mut [f64], weights: &[f64], p: f64) -> Option<()> {
    let m = weighted_mean(f, weights);
    f.iter_mut().for_each(|x| *x -= m);
    let e = energy_of(g, f, p);
    if !(e > 0.0) || !e.is_finite() {
        return None;
    }
    let c = e.powf(-1.0 / p);
    f.iter_mut().for_each(|x| *x *= c);
    Some(())
}

fn ascend(
    g: &Graph,
    weights: &[f64],
    p: f64,
    opts: &SolverOptions,
    mut f: Vec<f64>,
) -> Result<(Vec<f64>, f64, usize, bool)> {
    normalize(g, &mut f, weights, p)
        .ok_or_else(|| CarpetError::InvalidArgument("constant starting function".into()))?;
    let spec = ConstraintSpec {
        mean_constraints: vec![MeanConstraint {
            vertices: (0..g.vertex_count() as u32).collect(),
            weights: weights.to_vec(),
            target: 0.0,
        }],
        ..ConstraintSpec::default()
    };
    let mut q = oscillation(&f, weights, p);
    let mut best = (f.clone(), q);
    let tol = opts.tol_energy_rel.max(1e-13);
    for it in 0..MAX_OUTER {
        let mut s = numerator_gradient(&f, weights, p);
        let scale = s.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        if scale == 0.0 {
            return Ok((best.0, best.1, it, true));
        }
        s.iter_mut().for_each(|v| *v /= scale);
        let t = (s.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>() / p)
            .max(0.0)
            .powf(1.0 / (p - 1.0));
        let start: Vec<f64> = f.iter().map(|x| t * x).collect();
        let problem = Problem::new(g, &spec, p, Some(s))?;
        let out = newton::minimize(&problem, start, opts)?;
        let mut next = out.x;
        if normalize(g, &mut next, weights, p).is_none() {
            return Ok((best.0, best.1, it, false));
        }
        let q_next = oscillation(&next, weights, p);
        let gain = (q_next - q) / q.max(f64::MIN_POSITIVE);
        f = next;
        q = q_next;
        if q > best.1 {
            best = (f.clone(), q);
        }
        if gain.abs() <= tol {
            return Ok((best.0, best.1, it + 1, true));
        }
    }
    Ok((best.0, best.1, MAX_OUTER, false))
}

/// Best quotient over `opts.restarts` random starts (at least one).
pub fn rayleigh_max(g: &Graph, weights: &[f64], p: f64, opts: &SolverOptions) -> Result<RayleighReport> {
    crate::energy::check_exponent(p)?;
    if weights.len() != g.vertex_count() || weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(CarpetError::InvalidArgument("weights must be positive, one per vertex".into()));
    }
    if g.vertex_count() < 2 {
        return Err(CarpetError::InvalidArgument("need at least two vertices".into()));
    }
    let restarts = opts.restarts.max(1);
    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    let mut iterations = 0;
    let mut all_converged = true;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
        let f0: Vec<f64> = (0..g.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (f, q, its, conv) = ascend(g, weights, p, opts, f0)?;
        iterations += its;
        all_converged &= conv;
        if best.as_ref().is_none_or(|b| q > b.1) {
            best = Some((f, q, r));
        }
    }
    let (f, _, best_restart) = best.expect("at least one restart");
    let value = rayleigh_quotient(g, &f, weights, p)?;
    Ok(RayleighReport {
        value,
        certificate: GraphFunction::new(g, f)?,
        restarts,
        best_restart,
        iterations,
        converged: all_converged,
        is_lower_bound: true,
    })
}
