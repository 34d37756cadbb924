//! Nonlinear Gauss–Seidel: exact one-dimensional minimisation at each free
//! vertex in canonical order.

use super::newton::stages;
use super::problem::{Potential, Problem};
use super::{Outcome, SolverOptions};
use crate::error::{CarpetError, Result};

/// Root of the increasing function `t -> Σ φ'(t - x_u) - b` by Newton steps
/// safeguarded with bisection.
fn local_solve(pot: Potential, neighbors: &[f64], b: f64, start: f64) -> f64 {
    let psi = |t: f64| -> (f64, f64) {
        neighbors.iter().fold((-b, 0.0), |(v, d), &y| {
            (v + pot.d1(t - y), d + pot.d2(t - y))
        })
    };
    let mut lo = neighbors.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = neighbors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut width = (hi - lo).max(1.0);
    while psi(lo).0 > 0.0 {
        lo -= width;
        width *= 2.0;
    }
    while psi(hi).0 < 0.0 {
        hi += width;
        width *= 2.0;
    }
    let mut t = start.clamp(lo, hi);
    for _ in 0..200 {
        let (v, d) = psi(t);
        if v == 0.0 {
            return t;
        }
        if v > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let newton = t - v / d;
        let next = if d.is_finite() && d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - t).abs() <= 1e-16 * (1.0 + t.abs()) || hi - lo <= 1e-16 * (1.0 + t.abs()) {
            return next;
        }
        t = next;
    }
    t
}

pub(crate) fn minimize(problem: &Problem, x0: Vec<f64>, opts: &SolverOptions) -> Result<Outcome> {
    if problem.has_rows() {
        return Err(CarpetError::InvalidArgument(
            "Gauss-Seidel handles fixed-value constraints only".into(),
        ));
    }
    let mut x = x0;
    problem.impose_fixed(&mut x);
    let n = problem.n();
    let g = problem.g;
    let mut iterations = 0;
    let mut grad = vec![0.0; n];
    let mut nbr = Vec::new();
    let mut result = None;
    for stage in stages(problem.p, opts) {
        let pot = stage.pot;
        let mut f = problem.objective(&x, pot);
        let mut rel = f64::INFINITY;
        let mut kkt;
        let converged = loop {
            problem.gradient(&x, pot, &mut grad);
            kkt = problem.kkt(&grad);
            if kkt <= stage.tol_kkt && (rel <= opts.tol_energy_rel || kkt == 0.0) {
                break true;
            }
            if iterations >= opts.max_sweeps {
                break false;
            }
            iterations += 1;
            for v in 0..n {
                if !problem.is_free(v) || g.degree(v) == 0 {
                    continue;
                }
                nbr.clear();
                nbr.extend(g.neighbors(v).iter().map(|&u| x[u as usize]));
                let b = problem.linear.as_ref().map_or(0.0, |b| b[v]);
                x[v] = local_solve(pot, &nbr, b, x[v]);
            }
            let f_new = problem.objective(&x, pot);
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
