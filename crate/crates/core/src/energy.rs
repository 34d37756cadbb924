//! Discrete p-energies, their gradients and elementary transformations of
//! vertex functions.

use serde::{Deserialize, Serialize};

use crate::carpet::{pow3, SymmetryElement};
use crate::error::{CarpetError, Result};
use crate::graphs::{CarpetGraph, CellGraph, Graph, PointGraph};

/// Real function on the vertices of a graph, in canonical vertex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFunction {
    pub graph_ref: String,
    pub values: Vec<f64>,
}

impl GraphFunction {
    pub fn new(g: &Graph, values: Vec<f64>) -> Result<Self> {
        let f = GraphFunction {
            graph_ref: g.id().to_string(),
            values,
        };
        f.check(g)?;
        Ok(f)
    }

    pub fn constant(g: &Graph, c: f64) -> Self {
        GraphFunction {
            graph_ref: g.id().to_string(),
            values: vec![c; g.vertex_count()],
        }
    }

    pub fn from_fn(g: &Graph, f: impl FnMut(usize) -> f64) -> Self {
        GraphFunction {
            graph_ref: g.id().to_string(),
            values: (0..g.vertex_count()).map(f).collect(),
        }
    }

    /// Verifies length, graph identity and finiteness.
    pub fn check(&self, g: &Graph) -> Result<()> {
        if self.graph_ref != g.id() {
            return Err(CarpetError::Misaligned(format!(
                "function belongs to {:?}, graph is {:?}",
                self.graph_ref,
                g.id()
            )));
        }
        if self.values.len() != g.vertex_count() {
            return Err(CarpetError::Misaligned(format!(
                "{} values for {} vertices",
                self.values.len(),
                g.vertex_count()
            )));
        }
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(CarpetError::NonFinite(i)),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs_diff(&self, other: &GraphFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Raw and rescaled energy of a function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub p: f64,
    pub raw: f64,
    pub rescale_exponent: usize,
    pub rho: f64,
    pub rescaled: f64,
}

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(CarpetError::InvalidExponent(p))
    }
}

/// `|t|^p`.
#[inline]
pub fn abs_pow(t: f64, p: f64) -> f64 {
    let a = t.abs();
    if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else if a == 0.0 {
        0.0
    } else {
        a.powf(p)
    }
}

/// `sign(t) |t|^(p-1)`, zero at `t = 0`.
#[inline]
pub fn signed_pow(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t
    } else if p == 3.0 {
        t * t.abs()
    } else if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(p - 1.0)
    }
}

/// Energy of raw values without alignment checks.
pub(crate) fn energy_of(g: &Graph, values: &[f64], p: f64) -> f64 {
    g.edges()
        .iter()
        .map(|&[a, b]| abs_pow(values[a as usize] - values[b as usize], p))
        .collect::<CompensatedSum>()
        .value()
}

/// `E_p(f) = Σ_{edges} |f(x) - f(y)|^p`.
pub fn p_energy(g: &Graph, f: &GraphFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    f.check(g)?;
    Ok(energy_of(g, &f.values, p))
}

/// Energy together with its rescaling `rho^n · E_p(f)`.
pub fn p_energy_rescaled(g: &Graph, f: &GraphFunction, p: f64, rho: f64, n: usize) -> Result<EnergyValue> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(CarpetError::InvalidRho(rho));
    }
    let raw = p_energy(g, f, p)?;
    Ok(EnergyValue {
        p,
        raw,
        rescale_exponent: n,
        rho,
        rescaled: rho.powi(n as i32) * raw,
    })
}

pub(crate) fn gradient_of(g: &Graph, values: &[f64], p: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for &[a, b] in g.edges() {
        let d = p * signed_pow(values[a as usize] - values[b as usize], p);
        out[a as usize] += d;
        out[b as usize] -= d;
    }
}

/// Gradient `p Σ_{y~x} sign(f(x)-f(y)) |f(x)-f(y)|^(p-1)`.
pub fn p_energy_gradient(g: &Graph, f: &GraphFunction, p: f64) -> Result<GraphFunction> {
    check_exponent(p)?;
    f.check(g)?;
    let mut out = vec![0.0; f.len()];
    gradient_of(g, &f.values, p, &mut out);
    Ok(GraphFunction {
        graph_ref: f.graph_ref.clone(),
        values: out,
    })
}

/// Pointwise clamp to `[0, 1]`.
pub fn clamp_unit(f: &GraphFunction) -> GraphFunction {
    GraphFunction {
        graph_ref: f.graph_ref.clone(),
        values: f.values.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
    }
}

/// `f ∘ T`.
pub fn pullback_symmetry<G: CarpetGraph>(g: &G, f: &GraphFunction, t: SymmetryElement) -> Result<GraphFunction> {
    f.check(g.graph())?;
    let perm = g.symmetry_permutation(t)?;
    Ok(GraphFunction {
        graph_ref: f.graph_ref.clone(),
        values: perm.iter().map(|&j| f.values[j as usize]).collect(),
    })
}

/// `F_i^* f = f ∘ F_i`, a function on `coarse` from one on the next level.
pub fn pullback_cell<G: CarpetGraph>(fine: &G, coarse: &G, f: &GraphFunction, i: u8) -> Result<GraphFunction> {
    f.check(fine.graph())?;
    let map = coarse.embed_into(fine, i)?;
    Ok(GraphFunction {
        graph_ref: coarse.graph().id().to_string(),
        values: map.iter().map(|&j| f.values[j as usize]).collect(),
    })
}

/// Identifier of the full cell graph of level `n`.
pub fn cell_graph_ref(n: usize) -> String {
    format!("cell/{n}")
}

/// Block averages `P_{n+m,n} f(w)` over the children `w·W_m`.
pub fn coarsen(g: &CellGraph, f: &GraphFunction, n: usize) -> Result<GraphFunction> {
    f.check(g.graph())?;
    let level = g.level();
    if n > level {
        return Err(CarpetError::InvalidLevel(format!(
            "cannot coarsen level {level} to finer level {n}"
        )));
    }
    if g.graph().vertex_count() as u64 != 8u64.pow(level as u32) {
        return Err(CarpetError::Misaligned("coarsening needs the full word space".into()));
    }
    let block = 1usize << (3 * (level - n));
    let values = f
        .values
        .chunks(block)
        .map(|c| c.iter().copied().collect::<CompensatedSum>().value() / block as f64)
        .collect();
    Ok(GraphFunction {
        graph_ref: cell_graph_ref(n),
        values,
    })
}

/// Level-`n` cells whose closed square contains each vertex of `g`.
pub(crate) fn containing_cells_of_points(g: &PointGraph, n: usize) -> Result<Vec<Vec<u32>>> {
    let level = g.level();
    if n > level {
        return Err(CarpetError::InvalidLevel(format!(
            "cell level {n} is finer than point level {level}"
        )));
    }
    let side = 4 * pow3((level - n) as u32);
    let half = 2 * pow3(level as u32);
    let cells_per_row = pow3(n as u32);
    let candidates = |c: i64| -> Vec<i64> {
        let q = c / side;
        let mut out = Vec::with_capacity(2);
        if q < cells_per_row {
            out.push(q);
        }
        if c % side == 0 && q > 0 {
            out.push(q - 1);
        }
        out
    };
    Ok(g
        .points()
        .iter()
        .map(|pt| {
            let (sx, sy) = (pt.x + half, pt.y + half);
            let mut cells = Vec::new();
            for gx in candidates(sx) {
                for gy in candidates(sy) {
                    if let Some(w) = crate::carpet::Word::from_grid(n, gx as u64, gy as u64) {
                        cells.push(w.code() as u32);
                    }
                }
            }
            cells.sort_unstable();
            cells
        })
        .collect())
}

/// Mean of `f` over the vertices lying in each closed level-`n` cell; a
/// vertex on a shared cell boundary counts for every cell containing it.
pub fn average_points_to_cells(g: &PointGraph, f: &GraphFunction, n: usize) -> Result<GraphFunction> {
    f.check(g.graph())?;
    let cells = containing_cells_of_points(g, n)?;
    let count = 1usize << (3 * n);
    let mut sums = vec![CompensatedSum::default(); count];
    let mut hits = vec![0usize; count];
    for (v, cs) in cells.iter().enumerate() {
        for &c in cs {
            sums[c as usize].add(f.values[v]);
            hits[c as usize] += 1;
        }
    }
    if let Some(c) = hits.iter().position(|&h| h == 0) {
        return Err(CarpetError::InvalidArgument(format!(
            "cell {c} contains no vertex; refine the point graph"
        )));
    }
    Ok(GraphFunction {
        graph_ref: cell_graph_ref(n),
        values: sums
            .iter()
            .zip(&hits)
            .map(|(s, &h)| s.value() / h as f64)
            .collect(),
    })
}
