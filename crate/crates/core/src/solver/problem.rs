//! Internal representation of a constrained p-energy minimisation problem:
//! fixed vertices, affine mean rows over the free vertices and an optional
//! linear term in the objective `E_p(f) - <b, f>`.

use crate::energy::{CompensatedSum, abs_pow, signed_pow};
use crate::error::{CarpetError, Result};
use crate::graphs::{Graph, UNREACHABLE};

use super::ConstraintSpec;

/// One affine constraint `Σ w_i f(v_i) = target` over free vertices.
#[derive(Clone, Debug)]
pub(crate) struct Row {
    pub idx: Vec<u32>,
    pub w: Vec<f64>,
    pub target: f64,
}

impl Row {
    pub fn apply(&self, x: &[f64]) -> f64 {
        self.idx
            .iter()
            .zip(&self.w)
            .map(|(&i, &w)| w * x[i as usize])
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn dot(&self, other: &Row, scale: Option<&[f64]>) -> f64 {
        let mut acc = CompensatedSum::default();
        let (mut i, mut j) = (0, 0);
        while i < self.idx.len() && j < other.idx.len() {
            match self.idx[i].cmp(&other.idx[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let s = scale.map_or(1.0, |s| s[self.idx[i] as usize]);
                    acc.add(self.w[i] * other.w[j] * s);
                    i += 1;
                    j += 1;
                }
            }
        }
        acc.value()
    }
}

/// Smoothed edge potential `φ_ε(t) = (t² + ε²)^{p/2} - ε^p`; exact `|t|^p`
/// when `ε = 0`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Potential {
    pub p: f64,
    pub eps: f64,
}

impl Potential {
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        if self.eps == 0.0 {
            abs_pow(t, self.p)
        } else {
            (t * t + self.eps * self.eps).powf(0.5 * self.p) - self.eps.powf(self.p)
        }
    }

    #[inline]
    pub fn d1(&self, t: f64) -> f64 {
        if self.eps == 0.0 {
            self.p * signed_pow(t, self.p)
        } else {
            self.p * t * (t * t + self.eps * self.eps).powf(0.5 * self.p - 1.0)
        }
    }

    #[inline]
    pub fn d2(&self, t: f64) -> f64 {
        if self.eps == 0.0 {
            let p = self.p;
            if p == 2.0 {
                2.0
            } else if p == 3.0 {
                6.0 * t.abs()
            } else if t == 0.0 {
                if p > 2.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                p * (p - 1.0) * t.abs().powf(p - 2.0)
            }
        } else {
            let s = t * t + self.eps * self.eps;
            self.p * s.powf(0.5 * self.p - 2.0) * ((self.p - 1.0) * t * t + self.eps * self.eps)
        }
    }
}

/// Dense symmetric positive definite solve by Cholesky (small systems).
pub(crate) struct SmallCholesky {
    k: usize,
    l: Vec<f64>,
}

impl SmallCholesky {
    pub fn new(k: usize, a: &[f64]) -> Option<Self> {
        let scale = (0..k).map(|i| a[i * k + i].abs()).fold(0.0, f64::max);
        let mut l = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let mut s = a[i * k + j];
                for m in 0..j {
                    s -= l[i * k + m] * l[j * k + m];
                }
                if i == j {
                    if s <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
                        return None;
                    }
                    l[i * k + i] = s.sqrt();
                } else {
                    l[i * k + j] = s / l[j * k + j];
                }
            }
        }
        Some(SmallCholesky { k, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut y = b.to_vec();
        for i in 0..k {
            for m in 0..i {
                y[i] -= self.l[i * k + m] * y[m];
            }
            y[i] /= self.l[i * k + i];
        }
        for i in (0..k).rev() {
            for m in i + 1..k {
                y[i] -= self.l[m * k + i] * y[m];
            }
            y[i] /= self.l[i * k + i];
        }
        y
    }
}

pub(crate) struct Problem<'a> {
    pub g: &'a Graph,
    pub p: f64,
    /// Value of each fixed vertex, `None` when free.
    pub fixed: Vec<Option<f64>>,
    pub rows: Vec<Row>,
    pub linear: Option<Vec<f64>>,
    gram: Option<SmallCholesky>,
}

impl<'a> Problem<'a> {
    pub fn new(g: &'a Graph, spec: &ConstraintSpec, p: f64, linear: Option<Vec<f64>>) -> Result<Self> {
        let n = g.vertex_count();
        let mut fixed: Vec<Option<f64>> = vec![None; n];
        for (&v, &val) in &spec.dirichlet {
            if v as usize >= n {
                return Err(CarpetError::VertexOutOfRange(v));
            }
            if !val.is_finite() {
                return Err(CarpetError::NonFinite(v as usize));
            }
            fixed[v as usize] = Some(val);
        }
        for &v in &spec.zero_set {
            let slot = fixed.get_mut(v as usize).ok_or(CarpetError::VertexOutOfRange(v))?;
            match *slot {
                Some(val) if val != 0.0 => {
                    return Err(CarpetError::Infeasible(format!(
                        "vertex {v} is fixed to {val} and to zero"
                    )))
                }
                _ => *slot = Some(0.0),
            }
        }
        let mut rows = Vec::new();
        for (k, mc) in spec.mean_constraints.iter().enumerate() {
            if mc.vertices.len() != mc.weights.len() || mc.vertices.is_empty() {
                return Err(CarpetError::InvalidArgument(format!(
                    "mean constraint {k} needs one positive weight per vertex"
                )));
            }
            let total: f64 = mc.weights.iter().sum();
            if !(total > 0.0) || mc.weights.iter().any(|w| !(*w >= 0.0)) || !mc.target.is_finite() {
                return Err(CarpetError::InvalidArgument(format!(
                    "mean constraint {k} has invalid weights or target"
                )));
            }
            let mut pairs: Vec<(u32, f64)> = mc
                .vertices
                .iter()
                .zip(&mc.weights)
                .map(|(&v, &w)| (v, w / total))
                .collect();
            pairs.sort_unstable_by_key(|&(v, _)| v);
            if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(CarpetError::InvalidArgument(format!(
                    "mean constraint {k} repeats a vertex"
                )));
            }
            let mut target = mc.target;
            let mut row = Row {
                idx: Vec::new(),
                w: Vec::new(),
                target: 0.0,
            };
            for (v, w) in pairs {
                match fixed.get(v as usize).ok_or(CarpetError::VertexOutOfRange(v))? {
                    Some(val) => target -= w * val,
                    None => {
                        row.idx.push(v);
                        row.w.push(w);
                    }
                }
            }
            row.target = target;
            if row.idx.is_empty() {
                if target.abs() > 1e-12 {
                    return Err(CarpetError::Infeasible(format!(
                        "mean constraint {k} involves only fixed vertices"
                    )));
                }
                continue;
            }
            rows.push(row);
        }
        if let Some(b) = &linear {
            if b.len() != n {
                return Err(CarpetError::Misaligned("linear term length".into()));
            }
        }
        let gram = if rows.is_empty() {
            None
        } else {
            let k = rows.len();
            let mut a = vec![0.0; k * k];
            for i in 0..k {
                for j in 0..k {
                    a[i * k + j] = rows[i].dot(&rows[j], None);
                }
            }
            Some(SmallCholesky::new(k, &a).ok_or_else(|| {
                CarpetError::Infeasible("mean constraints are linearly dependent".into())
            })?)
        };
        let problem = Problem {
            g,
            p,
            fixed,
            rows,
            linear,
            gram,
        };
        problem.check_determined()?;
        Ok(problem)
    }

    /// Every connected component needs a fixed vertex or a constraint row.
    fn check_determined(&self) -> Result<()> {
        let labels = self.g.components();
        let count = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut anchored = vec![false; count];
        for (v, f) in self.fixed.iter().enumerate() {
            if f.is_some() {
                anchored[labels[v] as usize] = true;
            }
        }
        for row in &self.rows {
            for &v in &row.idx {
                anchored[labels[v as usize] as usize] = true;
            }
        }
        if anchored.iter().all(|&a| a) {
            Ok(())
        } else {
            Err(CarpetError::InvalidArgument("underdetermined component".into()))
        }
    }

    pub fn n(&self) -> usize {
        self.fixed.len()
    }

    pub fn is_free(&self, v: usize) -> bool {
        self.fixed[v].is_none()
    }

    pub fn has_rows(&self) -> bool {
        !self.rows.is_empty()
    }

    /// Overwrites fixed entries with their values.
    pub fn impose_fixed(&self, x: &mut [f64]) {
        for (xi, f) in x.iter_mut().zip(&self.fixed) {
            if let Some(v) = f {
                *xi = *v;
            }
        }
    }

    pub fn zero_fixed(&self, x: &mut [f64]) {
        for (xi, f) in x.iter_mut().zip(&self.fixed) {
            if f.is_some() {
                *xi = 0.0;
            }
        }
    }

    /// Objective `Σ φ(Δ) - <b, x>`.
    pub fn objective(&self, x: &[f64], pot: Potential) -> f64 {
        let mut s: CompensatedSum = self
            .g
            .edges()
            .iter()
            .map(|&[a, b]| pot.value(x[a as usize] - x[b as usize]))
            .collect();
        if let Some(b) = &self.linear {
            for (v, (&bi, &xi)) in b.iter().zip(x).enumerate() {
                if self.is_free(v) {
                    s.add(-bi * xi);
                }
            }
        }
        s.value()
    }

    /// Gradient of the objective with fixed entries zeroed.
    pub fn gradient(&self, x: &[f64], pot: Potential, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &[a, b] in self.g.edges() {
            let d = pot.d1(x[a as usize] - x[b as usize]);
            out[a as usize] += d;
            out[b as usize] -= d;
        }
        if let Some(b) = &self.linear {
            for (o, bi) in out.iter_mut().zip(b) {
                *o -= bi;
            }
        }
        self.zero_fixed(out);
    }

    /// Euclidean projection onto the null space of the rows (free entries).
    pub fn project(&self, v: &mut [f64]) {
        let Some(chol) = &self.gram else { return };
        let rhs: Vec<f64> = self.rows.iter().map(|r| r.apply(v)).collect();
        let lambda = chol.solve(&rhs);
        for (row, l) in self.rows.iter().zip(&lambda) {
            for (&i, &w) in row.idx.iter().zip(&row.w) {
                v[i as usize] -= l * w;
            }
        }
    }

    /// Projection onto the null space of the rows in the metric of the
    /// diagonal `1/dinv`: `v - Dinv Cᵀ (C Dinv Cᵀ)^{-1} C v`.
    pub fn project_scaled(&self, v: &mut [f64], dinv: &[f64]) -> Result<()> {
        if self.rows.is_empty() {
            return Ok(());
        }
        let k = self.rows.len();
        let mut a = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                a[i * k + j] = self.rows[i].dot(&self.rows[j], Some(dinv));
            }
        }
        let chol = SmallCholesky::new(k, &a)
            .ok_or_else(|| CarpetError::Infeasible("degenerate scaled constraint system".into()))?;
        let rhs: Vec<f64> = self.rows.iter().map(|r| r.apply(v)).collect();
        let lambda = chol.solve(&rhs);
        for (row, l) in self.rows.iter().zip(&lambda) {
            for (&i, &w) in row.idx.iter().zip(&row.w) {
                v[i as usize] -= l * w * dinv[i as usize];
            }
        }
        Ok(())
    }

    /// Max-norm of the projected gradient.
    pub fn kkt(&self, grad: &[f64]) -> f64 {
        let mut g = grad.to_vec();
        self.project(&mut g);
        g.iter()
            .enumerate()
            .filter(|&(v, _)| self.is_free(v))
            .map(|(_, x)| x.abs())
            .fold(0.0, f64::max)
    }

    /// Moves `x` onto the affine constraint set along the row directions.
    pub fn make_feasible(&self, x: &mut [f64]) {
        self.impose_fixed(x);
        let Some(chol) = &self.gram else { return };
        let rhs: Vec<f64> = self.rows.iter().map(|r| r.target - r.apply(x)).collect();
        let lambda = chol.solve(&rhs);
        for (row, l) in self.rows.iter().zip(&lambda) {
            for (&i, &w) in row.idx.iter().zip(&row.w) {
                x[i as usize] += l * w;
            }
        }
    }

    /// Initial guess by BFS-distance interpolation of the fixed data; free
    /// vertices in components without fixed data start at zero.
    pub fn interpolated_start(&self) -> Vec<f64> {
        let n = self.n();
        let mut x = vec![0.0; n];
        let mut values: Vec<f64> = self.fixed.iter().flatten().copied().collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        if values.len() == 2 {
            let (lo, hi) = (values[0], values[1]);
            let src = |target: f64| -> Vec<u32> {
                (0..n as u32)
                    .filter(|&v| self.fixed[v as usize] == Some(target))
                    .collect()
            };
            let d_lo = self.g.bfs(&src(lo));
            let d_hi = self.g.bfs(&src(hi));
            for v in 0..n {
                if d_lo[v] == UNREACHABLE || d_hi[v] == UNREACHABLE {
                    continue;
                }
                let (a, b) = (f64::from(d_lo[v]), f64::from(d_hi[v]));
                x[v] = (b * lo + a * hi) / (a + b);
            }
        } else if !values.is_empty() {
            // Nearest fixed value by multi-source BFS.
            let mut owner = vec![f64::NAN; n];
            let mut queue = std::collections::VecDeque::new();
            for (v, f) in self.fixed.iter().enumerate() {
                if let Some(val) = f {
                    owner[v] = *val;
                    queue.push_back(v as u32);
                }
            }
            while let Some(v) = queue.pop_front() {
                for &u in self.g.neighbors(v as usize) {
                    if owner[u as usize].is_nan() {
                        owner[u as usize] = owner[v as usize];
                        queue.push_back(u);
                    }
                }
            }
            for v in 0..n {
                if !owner[v].is_nan() {
                    x[v] = owner[v];
                }
            }
        }
        self.make_feasible(&mut x);
        x
    }
}
