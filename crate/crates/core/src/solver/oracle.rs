//! Reference solver for `p = 2` Dirichlet problems: the graph Laplacian
//! system restricted to free vertices, solved by plain conjugate gradients.

use std::collections::BTreeMap;

use crate::energy::CompensatedSum;
use crate::error::{CarpetError, Result};
use crate::graphs::Graph;

/// Harmonic extension of `dirichlet` and its Dirichlet energy.
pub fn harmonic_oracle(g: &Graph, dirichlet: &BTreeMap<u32, f64>, rel_tol: f64) -> Result<(Vec<f64>, f64)> {
    let n = g.vertex_count();
    let mut fixed = vec![false; n];
    let mut x = vec![0.0; n];
    for (&v, &val) in dirichlet {
        if v as usize >= n {
            return Err(CarpetError::VertexOutOfRange(v));
        }
        fixed[v as usize] = true;
        x[v as usize] = val;
    }
    // b = -L_{FB} x_B on free rows.
    let mut b = vec![0.0; n];
    for &[a, c] in g.edges() {
        let (a, c) = (a as usize, c as usize);
        if !fixed[a] && fixed[c] {
            b[a] += x[c];
        }
        if fixed[a] && !fixed[c] {
            b[c] += x[a];
        }
    }
    let laplace = |v: &[f64], out: &mut [f64]| {
        for i in 0..n {
            if fixed[i] {
                out[i] = 0.0;
                continue;
            }
            let mut s = 0.0;
            for &u in g.neighbors(i) {
                s += v[i];
                if !fixed[u as usize] {
                    s -= v[u as usize];
                }
            }
            out[i] = s;
        }
    };
    let mut u = vec![0.0; n];
    let mut r = b.clone();
    let mut d = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let target = rel_tol * rel_tol * rr;
    let mut ad = vec![0.0; n];
    let mut it = 0;
    while rr > target && it < 100 * n + 1000 {
        laplace(&d, &mut ad);
        let alpha = rr / d.iter().zip(&ad).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            u[i] += alpha * d[i];
            r[i] -= alpha * ad[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            d[i] = r[i] + beta * d[i];
        }
        it += 1;
    }
    if rr > target {
        return Err(CarpetError::NotConverged("oracle conjugate gradients".into()));
    }
    for i in 0..n {
        if !fixed[i] {
            x[i] = u[i];
        }
    }
    let energy = g
        .edges()
        .iter()
        .map(|&[a, c]| {
            let t = x[a as usize] - x[c as usize];
            t * t
        })
        .collect::<CompensatedSum>()
        .value();
    Ok((x, energy))
}
