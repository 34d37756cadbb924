//! Projected gradient descent with Armijo backtracking.

use super::newton::stages;
use super::problem::Problem;
use super::{Outcome, SolverOptions};
use crate::error::Result;

const ROUNDING: f64 = 1e-13;

pub(crate) fn minimize(problem: &Problem, x0: Vec<f64>, opts: &SolverOptions) -> Result<Outcome> {
    let mut x = x0;
    problem.make_feasible(&mut x);
    let n = problem.n();
    let mut iterations = 0;
    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut step = 1.0 / (2.0 * problem.p * problem.g.max_degree().max(1) as f64);
    let mut result = None;
    for stage in stages(problem.p, opts) {
        let pot = stage.pot;
        let mut f = problem.objective(&x, pot);
        let mut rel = f64::INFINITY;
        let mut kkt;
        let converged = loop {
            problem.gradient(&x, pot, &mut grad);
            problem.project(&mut grad);
            problem.zero_fixed(&mut grad);
            kkt = grad.iter().fold(0.0, |m: f64, g| m.max(g.abs()));
            if kkt <= stage.tol_kkt && (rel <= opts.tol_energy_rel || kkt == 0.0) {
                break true;
            }
            if iterations >= opts.max_sweeps {
                break false;
            }
            iterations += 1;
            let slope: f64 = -grad.iter().map(|g| g * g).sum::<f64>();
            let mut accepted = None;
            step *= 2.0;
            for _ in 0..80 {
                for i in 0..n {
                    trial[i] = x[i] - step * grad[i];
                }
                let f_new = problem.objective(&trial, pot);
                // Near the minimiser energy differences drown in rounding.
                // The objective is convex along the ray, so a nonpositive
                // directional derivative at the trial point certifies descent.
                if (f_new - f).abs() <= ROUNDING * f.abs().max(1.0) {
                    problem.gradient(&trial, pot, &mut g_trial);
                    problem.project(&mut g_trial);
                    problem.zero_fixed(&mut g_trial);
                    if g_trial.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>() >= 0.0 {
                        accepted = Some(f_new.min(f));
                        break;
                    }
                } else if f_new <= f + 1e-4 * step * slope {
                    accepted = Some(f_new);
                    break;
                }
                step *= 0.5;
            }
            let Some(f_new) = accepted else {
                break kkt <= stage.tol_kkt;
            };
            std::mem::swap(&mut x, &mut trial);
            rel = ((f - f_new) / f_new.abs().max(f64::MIN_POSITIVE)).max(0.0);
            f = f_new;
        };
        if stage.last {
            result = Some(Outcome {
                objective: f,
                x: x.clone(),
                iterations,
                kkt,
                kkt_tolerance: stage.tol_kkt,
                rel_decrease: rel.min(1.0),
                converged,
            });
        }
    }
    Ok(result.expect("the schedule ends with a final stage"))
}
