//! Damped Newton iteration with inexact Newton steps from projected,
//! Jacobi-preconditioned conjugate gradients.

use super::problem::{Potential, Problem};
use super::{Outcome, SolverOptions};
use crate::error::Result;

const ARMIJO: f64 = 1e-4;
const MAX_CG: usize = 50_000;
/// Safety margin over the estimated rounding floor of the gradient.
const NOISE_FACTOR: f64 = 8.0;
/// Consecutive steps without measurable progress before a stage ends.
const MAX_STALLS: usize = 5;

struct Hessian<'p, 'g> {
    problem: &'p Problem<'g>,
    weights: Vec<f64>,
    dinv: Vec<f64>,
    /// Size of the gradient perturbation caused by rounding `x`.
    noise: f64,
}

impl Hessian<'_, '_> {
    fn new<'p, 'g>(problem: &'p Problem<'g>, x: &[f64], pot: Potential) -> Hessian<'p, 'g> {
        let edges = problem.g.edges();
        let mut weights: Vec<f64> = edges
            .iter()
            .map(|&[a, b]| pot.d2(x[a as usize] - x[b as usize]))
            .collect();
        let finite_max = weights
            .iter()
            .copied()
            .filter(|w| w.is_finite())
            .fold(0.0, f64::max);
        let mean = weights.iter().filter(|w| w.is_finite()).sum::<f64>() / weights.len().max(1) as f64;
        let floor = (1e-10 * mean).max(1e-14 * finite_max).max(f64::MIN_POSITIVE);
        let cap = if finite_max > 0.0 { 1e16 * finite_max } else { 1.0 };
        for w in &mut weights {
            *w = w.clamp(floor, cap);
        }
        let mut diag = vec![0.0; problem.n()];
        let mut spread = vec![0.0; problem.n()];
        for (&[a, b], &w) in edges.iter().zip(&weights) {
            diag[a as usize] += w;
            diag[b as usize] += w;
            let size = w * (x[a as usize].abs() + x[b as usize].abs());
            spread[a as usize] += size;
            spread[b as usize] += size;
        }
        let noise = spread
            .iter()
            .enumerate()
            .filter(|&(v, _)| problem.is_free(v))
            .map(|(_, s)| s * f64::EPSILON)
            .fold(0.0, f64::max);
        let dinv = diag
            .iter()
            .enumerate()
            .map(|(v, &d)| if problem.is_free(v) && d > 0.0 { 1.0 / d } else { 0.0 })
            .collect();
        Hessian {
            problem,
            weights,
            dinv,
            noise,
        }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (&[a, b], &w) in self.problem.g.edges().iter().zip(&self.weights) {
            let t = w * (v[a as usize] - v[b as usize]);
            out[a as usize] += t;
            out[b as usize] -= t;
        }
        self.problem.zero_fixed(out);
    }

    fn precondition(&self, r: &[f64], out: &mut [f64]) -> Result<()> {
        for ((o, &ri), &di) in out.iter_mut().zip(r).zip(&self.dinv) {
            *o = ri * di;
        }
        self.problem.project_scaled(out, &self.dinv)
    }

    /// Approximately minimises `g·d + ½ dᵀHd` over free directions in the
    /// null space of the rows.
    fn solve(&self, grad: &[f64], eta: f64) -> Result<(Vec<f64>, usize)> {
        let n = grad.len();
        let mut d = vec![0.0; n];
        let mut r = grad.to_vec();
        let mut z = vec![0.0; n];
        self.precondition(&r, &mut z)?;
        let mut dir: Vec<f64> = z.iter().map(|v| -v).collect();
        let mut rz = dot(&r, &z);
        let rz0 = rz;
        let mut hp = vec![0.0; n];
        let mut iters = 0;
        while iters < MAX_CG && rz > eta * eta * rz0 && rz > 0.0 {
            self.apply(&dir, &mut hp);
            let curvature = dot(&dir, &hp);
            if !(curvature > 0.0) {
                break;
            }
            let alpha = rz / curvature;
            for i in 0..n {
                d[i] += alpha * dir[i];
                r[i] += alpha * hp[i];
            }
            self.precondition(&r, &mut z)?;
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                dir[i] = -z[i] + beta * dir[i];
            }
            iters += 1;
        }
        // Recurrences drift off the constraint space over long runs.
        self.problem.project_scaled(&mut d, &self.dinv)?;
        Ok((d, iters))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Stage of the smoothing schedule.
pub(crate) struct Stage {
    pub pot: Potential,
    pub tol_kkt: f64,
    pub last: bool,
}

/// Smoothing schedule: a single exact stage for `p >= 2`, otherwise
/// geometric continuation of `ε` down to the floor.
pub(crate) fn stages(p: f64, opts: &SolverOptions) -> Vec<Stage> {
    if p >= 2.0 {
        return vec![Stage {
            pot: Potential { p, eps: 0.0 },
            tol_kkt: opts.tol_kkt,
            last: true,
        }];
    }
    let mut out = Vec::new();
    let mut eps = opts.smoothing_eps.max(opts.smoothing_floor);
    loop {
        let last = eps <= opts.smoothing_floor;
        out.push(Stage {
            pot: Potential { p, eps },
            tol_kkt: if last { opts.tol_kkt } else { opts.tol_kkt.max(eps) },
            last,
        });
        if last {
            break;
        }
        eps = (eps * 0.5).max(opts.smoothing_floor);
    }
    out
}

pub(crate) fn minimize(problem: &Problem, x0: Vec<f64>, opts: &SolverOptions) -> Result<Outcome> {
    let mut x = x0;
    problem.make_feasible(&mut x);
    let mut iterations = 0;
    let mut outcome = None;
    for stage in stages(problem.p, opts) {
        let r = run_stage(problem, &mut x, &stage, opts, &mut iterations)?;
        if stage.last {
            outcome = Some(Outcome {
                objective: problem.objective(&x, stage.pot),
                x: x.clone(),
                iterations,
                kkt: r.kkt,
                kkt_tolerance: r.kkt_tolerance,
                rel_decrease: r.rel,
                converged: r.converged,
            });
        }
    }
    Ok(outcome.expect("the schedule ends with a final stage"))
}

fn run_stage(
    problem: &Problem,
    x: &mut Vec<f64>,
    stage: &Stage,
    opts: &SolverOptions,
    iterations: &mut usize,
) -> Result<StageResult> {
    let n = problem.n();
    let pot = stage.pot;
    let mut grad = vec![0.0; n];
    problem.gradient(x, pot, &mut grad);
    let mut kkt = problem.kkt(&grad);
    let mut f = problem.objective(x, pot);
    let mut rel = f64::INFINITY;
    let mut eta_prev: f64 = 0.1;
    let mut kkt_prev = kkt;
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut steepest = false;
    let mut stalls = 0;
    loop {
        let hess = Hessian::new(problem, x, pot);
        let tol = stage.tol_kkt.max(NOISE_FACTOR * hess.noise);
        let done = |kkt: f64, rel: f64| kkt <= tol && (rel <= opts.tol_energy_rel || kkt == 0.0);
        if done(kkt, rel) {
            return Ok(StageResult::new(kkt, tol, rel, true));
        }
        if *iterations >= opts.max_sweeps || stalls >= MAX_STALLS {
            return Ok(StageResult::new(kkt, tol, rel, kkt <= tol));
        }
        *iterations += 1;
        let ratio = kkt / kkt_prev.max(f64::MIN_POSITIVE);
        let mut eta = (0.9 * ratio * ratio).min(0.1);
        let safeguard = 0.9 * eta_prev * eta_prev;
        if safeguard > 0.1 {
            eta = eta.max(safeguard);
        }
        // No need to solve the model beyond what the tolerance asks for.
        eta = eta.max(1e-3 * tol / kkt).clamp(1e-12, 0.1);
        eta_prev = eta;
        // The multiplier part of the gradient is orthogonal to feasible
        // directions in exact arithmetic but swamps inner products in rounding.
        let mut pgrad = grad.clone();
        problem.project(&mut pgrad);
        problem.zero_fixed(&mut pgrad);
        let (mut d, _) = if steepest {
            (vec![0.0; n], 0)
        } else {
            hess.solve(&pgrad, eta)?
        };
        let mut slope = dot(&pgrad, &d);
        if !(slope < 0.0) {
            d = pgrad.iter().map(|v| -v).collect();
            slope = dot(&pgrad, &d);
            if !(slope < 0.0) {
                return Ok(StageResult::new(kkt, tol, 0.0, kkt <= tol));
            }
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = x[i] + alpha * d[i];
            }
            if trial == *x {
                break;
            }
            let f_new = problem.objective(&trial, pot);
            if f_new < f && f_new <= f + ARMIJO * alpha * slope {
                accepted = Some(f_new);
                break;
            }
            if (f_new - f).abs() <= 1e-13 * f.abs().max(1e-300) {
                // Rounding-level change: accept if the gradient improves.
                problem.gradient(&trial, pot, &mut g_trial);
                if problem.kkt(&g_trial) < kkt {
                    accepted = Some(f_new);
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some(f_new) = accepted else {
            if steepest {
                return Ok(StageResult::new(kkt, tol, 0.0, kkt <= tol));
            }
            steepest = true;
            continue;
        };
        steepest = false;
        std::mem::swap(x, &mut trial);
        let f_new = if problem.has_rows() {
            problem.make_feasible(x);
            problem.objective(x, pot)
        } else {
            f_new
        };
        rel = ((f - f_new) / f_new.abs().max(f64::MIN_POSITIVE)).max(0.0);
        f = f_new;
        problem.gradient(x, pot, &mut grad);
        kkt_prev = kkt;
        kkt = problem.kkt(&grad);
        if rel == 0.0 && kkt >= 0.5 * kkt_prev {
            stalls += 1;
        } else {
            stalls = 0;
        }
    }
}

pub(crate) struct StageResult {
    pub kkt: f64,
    /// Residual actually demanded: the requested tolerance or the rounding
    /// floor of the gradient at the final iterate, whichever is larger.
    pub kkt_tolerance: f64,
    pub rel: f64,
    pub converged: bool,
}

impl StageResult {
    fn new(kkt: f64, kkt_tolerance: f64, rel: f64, converged: bool) -> Self {
        StageResult {
            kkt,
            kkt_tolerance,
            rel: rel.min(1.0),
            converged,
        }
    }
}
