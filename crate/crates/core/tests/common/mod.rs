//! Dense linear-algebra references for `p = 2` and random instance helpers.

#![allow(dead_code)]

use std::collections::BTreeMap;

use carpet_core::graphs::Graph;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_values(rng: &mut impl Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `L` with `f^T L f = Σ_{edges} (f_a - f_b)^2`.
pub fn laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for &[a, b] in g.edges() {
        let (a, b) = (a as usize, b as usize);
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
        l[(a, b)] -= 1.0;
        l[(b, a)] -= 1.0;
    }
    l
}

pub fn dirichlet_energy(g: &Graph, f: &[f64]) -> f64 {
    g.edges()
        .iter()
        .map(|&[a, b]| (f[a as usize] - f[b as usize]).powi(2))
        .sum()
}

/// Harmonic extension of `fixed` by a dense solve on the free vertices.
pub fn dense_dirichlet(g: &Graph, fixed: &BTreeMap<u32, f64>) -> (Vec<f64>, f64) {
    let n = g.vertex_count();
    let l = laplacian(g);
    let free: Vec<usize> = (0..n).filter(|v| !fixed.contains_key(&(*v as u32))).collect();
    let mut x = vec![0.0; n];
    for (&v, &val) in fixed {
        x[v as usize] = val;
    }
    let k = free.len();
    if k > 0 {
        let lff = DMatrix::from_fn(k, k, |i, j| l[(free[i], free[j])]);
        let rhs = DVector::from_fn(k, |i, _| -fixed.iter().map(|(&v, &val)| l[(free[i], v as usize)] * val).sum::<f64>());
        let sol = lff.cholesky().expect("free block is positive definite").solve(&rhs);
        for (i, &v) in free.iter().enumerate() {
            x[v] = sol[i];
        }
    }
    let e = dirichlet_energy(g, &x);
    (x, e)
}

pub fn dense_conductance(g: &Graph, a: &[u32], b: &[u32]) -> f64 {
    let fixed: BTreeMap<u32, f64> = a.iter().map(|&v| (v, 1.0)).chain(b.iter().map(|&v| (v, 0.0))).collect();
    dense_dirichlet(g, &fixed).1
}

/// `min Σ (f_a - f_b)^2` subject to `f = 0` on `zero` and uniform block
/// means, via the dense KKT system.
pub fn dense_mean_constrained(g: &Graph, zero: &[u32], means: &[(Vec<u32>, f64)]) -> (Vec<f64>, f64) {
    let n = g.vertex_count();
    let l = laplacian(g);
    let mut is_zero = vec![false; n];
    for &v in zero {
        is_zero[v as usize] = true;
    }
    let vars: Vec<usize> = (0..n).filter(|&v| !is_zero[v]).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in vars.iter().enumerate() {
        slot[v] = i;
    }
    let k = vars.len();
    let size = k + means.len();
    let mut m = DMatrix::zeros(size, size);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = 2.0 * l[(vars[i], vars[j])];
        }
    }
    let mut rhs = DVector::zeros(size);
    for (c, (set, target)) in means.iter().enumerate() {
        let w = 1.0 / set.len() as f64;
        for &v in set {
            if slot[v as usize] != usize::MAX {
                m[(k + c, slot[v as usize])] = w;
                m[(slot[v as usize], k + c)] = w;
            }
        }
        rhs[k + c] = *target;
    }
    let sol = m.full_piv_lu().solve(&rhs).expect("KKT system is nonsingular");
    let mut x = vec![0.0; n];
    for (i, &v) in vars.iter().enumerate() {
        x[v] = sol[i];
    }
    let e = dirichlet_energy(g, &x);
    (x, e)
}

/// `sup Σ ν |f - <f>|^2 / E_2(f)` for a uniform weight `ν` on a connected
/// graph: `ν` over the spectral gap of the Laplacian.
pub fn dense_lambda(g: &Graph, nu: f64) -> f64 {
    let eig = SymmetricEigen::new(laplacian(g));
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    nu / values[1]
}
