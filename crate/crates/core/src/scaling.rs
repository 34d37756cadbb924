//! Conductance families across levels, estimates of the resistance scaling
//! factor `ρ_p` and walk dimension `β_p`, the pasted functions `ĥ_k` and the
//! strictness experiment.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carpet::{LatticePoint, SymmetryElement, Word};
use crate::energy::{energy_of, GraphFunction};
use crate::error::{CarpetError, Result};
use crate::graphs::{
    build_cell_graph, build_chain_graph, build_point_graph, CarpetGraph, CellAdjacency, CellGraph,
    PointGraph, PointKind,
};
use crate::solver::{conductance, conductance_report, SolveReport, SolverOptions};

/// Hausdorff dimension `log 8 / log 3` of the carpet.
pub fn hausdorff_dimension() -> f64 {
    8f64.ln() / 3f64.ln()
}

/// `β = log(8ρ) / log 3`.
pub fn walk_dimension(rho: f64) -> f64 {
    (8.0 * rho).ln() / 3f64.ln()
}

/// Graph family carrying the left/right boundary sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFamily {
    /// Cell graph `G_n`, between the left and right columns of cells.
    Cell,
    /// Modified point graph `𝔾_n`, between the vertices on the left and right sides.
    Point,
}

/// Minimizer of the left/right conductance problem.
pub fn lr_report(n: usize, p: f64, family: GraphFamily, opts: &SolverOptions) -> Result<SolveReport> {
    match family {
        GraphFamily::Cell => {
            let g = build_cell_graph(n, CellAdjacency::Full)?;
            conductance_report(g.graph(), g.subset("left")?, g.subset("right")?, p, opts)
        }
        GraphFamily::Point => {
            let g = build_point_graph(n, PointKind::Modified)?;
            lr_point_report(&g, p, opts)
        }
    }
}

fn lr_point_report(g: &PointGraph, p: f64, opts: &SolverOptions) -> Result<SolveReport> {
    conductance_report(g.graph(), g.subset("left")?, g.subset("right")?, p, opts)
}

fn converged_energy(report: &SolveReport, what: &str) -> Result<f64> {
    if report.converged {
        Ok(report.energy)
    } else {
        Err(CarpetError::NotConverged(format!(
            "{what}: KKT residual {:.3e}",
            report.kkt_residual
        )))
    }
}

/// `C_p^{(n)}(L↔R)` on the chosen family.
pub fn conductance_lr(n: usize, p: f64, family: GraphFamily, opts: &SolverOptions) -> Result<f64> {
    converged_energy(&lr_report(n, p, family, opts)?, "left/right conductance")
}

/// Grid presence of the 5x5 window of level-`|w|` cells centred at `w`,
/// canonicalised over the symmetry group. The conductance between `w·W_n`
/// and the complement of its 1-neighbourhood depends only on this pattern.
fn neighborhood_pattern(w: &Word) -> Vec<(i64, i64)> {
    let (gx, gy) = w.grid_position();
    let mut present = Vec::new();
    for dy in -2i64..=2 {
        for dx in -2i64..=2 {
            let (x, y) = (gx as i64 + dx, gy as i64 + dy);
            if x >= 0 && y >= 0 && Word::from_grid(w.len(), x as u64, y as u64).is_some() {
                present.push((dx, dy));
            }
        }
    }
    SymmetryElement::ALL
        .iter()
        .map(|t| {
            let mut image: Vec<(i64, i64)> = present.iter().map(|&(x, y)| t.apply(x, y)).collect();
            image.sort_unstable();
            image
        })
        .min()
        .expect("the group is nonempty")
}

/// `C_p^{G_{n+|w|}}(w·W_n, W_{n+|w|} \ B_n(w, 1))`, solved on the cells within
/// grid distance two of `w` (farther cells only touch the zero set).
pub fn neighborhood_conductance(w: &Word, n: usize, p: f64, opts: &SolverOptions) -> Result<f64> {
    if w.is_empty() {
        return Err(CarpetError::InvalidArgument(
            "the empty word has no complement to connect to".into(),
        ));
    }
    let (gx, gy) = w.grid_position();
    let mut heads: Vec<(Word, bool)> = Vec::new();
    for dy in -2i64..=2 {
        for dx in -2i64..=2 {
            let (x, y) = (gx as i64 + dx, gy as i64 + dy);
            if x < 0 || y < 0 {
                continue;
            }
            if let Some(u) = Word::from_grid(w.len(), x as u64, y as u64) {
                heads.push((u, dx.abs().max(dy.abs()) == 2));
            }
        }
    }
    heads.sort_unstable();
    let mut words = Vec::with_capacity(heads.len() << (3 * n));
    let mut source = Vec::new();
    let mut sink = Vec::new();
    for (u, outer) in &heads {
        for tail in Word::all(n)? {
            let idx = words.len() as u32;
            words.push(u.concat(&tail)?);
            if u == w {
                source.push(idx);
            } else if *outer {
                sink.push(idx);
            }
        }
    }
    let id = format!("neighborhood/{w}/{n}");
    let g = CellGraph::from_words(id, w.len() + n, CellAdjacency::Full, words)?;
    if sink.is_empty() {
        return Ok(0.0);
    }
    conductance(g.graph(), &source, &sink, p, opts)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NeighborhoodResult {
    /// Largest conductance among the scanned words; a lower bound for the
    /// supremum over all words.
    pub value: f64,
    pub witness: Word,
    pub ambient_depth: usize,
    /// Distinct neighbourhood patterns actually solved.
    pub patterns: usize,
    pub per_pattern: Vec<(Word, f64)>,
}

/// Scans `w ∈ W_1 ∪ … ∪ W_m`, one representative per neighbourhood
/// pattern, and returns the largest conductance.
pub fn conductance_neighborhood(n: usize, p: f64, ambient_depth: usize, opts: &SolverOptions) -> Result<NeighborhoodResult> {
    if !(1..=2).contains(&ambient_depth) {
        return Err(CarpetError::InvalidArgument("ambient depth must be 1 or 2".into()));
    }
    let mut representatives: BTreeMap<Vec<(i64, i64)>, Word> = BTreeMap::new();
    for k in 1..=ambient_depth {
        for w in Word::all(k)? {
            representatives.entry(neighborhood_pattern(&w)).or_insert(w);
        }
    }
    let mut reps: Vec<Word> = representatives.into_values().collect();
    reps.sort_unstable();
    let values = reps
        .par_iter()
        .map(|w| neighborhood_conductance(w, n, p, opts).map(|c| (*w, c)))
        .collect::<Result<Vec<_>>>()?;
    let &(witness, value) = values
        .iter()
        .fold(None, |best: Option<&(Word, f64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
        .expect("at least one pattern");
    Ok(NeighborhoodResult {
        value,
        witness,
        ambient_depth,
        patterns: values.len(),
        per_pattern: values,
    })
}

/// Minimizer of the conductance across the `M`-copy chain `G_{n,M}`.
pub fn chain_report(n: usize, copies: usize, p: f64, opts: &SolverOptions) -> Result<SolveReport> {
    let g = build_chain_graph(n, copies)?;
    conductance_report(g.graph(), g.left(), g.right(), p, opts)
}

/// `C_p^{(n,M)}`.
pub fn conductance_chain(n: usize, copies: usize, p: f64, opts: &SolverOptions) -> Result<f64> {
    converged_energy(&chain_report(n, copies, p, opts)?, "chain conductance")
}

/// Smallest minimizer value over the first `⌈M/2⌉` copies of the chain.
pub fn half_chain_minimum(n: usize, copies: usize, p: f64, opts: &SolverOptions) -> Result<f64> {
    let g = build_chain_graph(n, copies)?;
    let report = conductance_report(g.graph(), g.left(), g.right(), p, opts)?;
    converged_energy(&report, "chain conductance")?;
    let half = copies.div_ceil(2);
    Ok((0..half)
        .flat_map(|i| g.copy_vertices(i))
        .map(|v| report.minimizer.values[v as usize])
        .fold(f64::INFINITY, f64::min))
}

/// The pair `(p_{2m}, p̂_m)`: an edge midpoint of the unit square and the
/// point a quarter of the way along the diagonal towards the next one.
pub fn standard_point_pair(m: usize) -> Result<(LatticePoint, LatticePoint)> {
    const MIDPOINTS: [(i64, i64); 4] = [(-2, 0), (0, -2), (2, 0), (0, 2)];
    if m > 3 {
        return Err(CarpetError::InvalidArgument("m must lie in 0..=3".into()));
    }
    let (a, b) = (MIDPOINTS[m], MIDPOINTS[(m + 1) % 4]);
    Ok((
        LatticePoint::new(a.0, a.1, 0),
        LatticePoint::new((a.0 + b.0) / 2, (a.1 + b.1) / 2, 0),
    ))
}

/// `R_p^{𝔾_n}(x, y) = 1 / C_p^{𝔾_n}({x}, {y})`.
pub fn point_resistance(n: usize, x: &LatticePoint, y: &LatticePoint, p: f64, opts: &SolverOptions) -> Result<f64> {
    let g = build_point_graph(n, PointKind::Modified)?;
    point_resistance_in(&g, x, y, p, opts)
}

pub fn point_resistance_in(g: &PointGraph, x: &LatticePoint, y: &LatticePoint, p: f64, opts: &SolverOptions) -> Result<f64> {
    let a = g.index_of(x).ok_or(CarpetError::NotAVertex)?;
    let b = g.index_of(y).ok_or(CarpetError::NotAVertex)?;
    if a == b {
        return Err(CarpetError::CoincidentPoints);
    }
    Ok(1.0 / conductance(g.graph(), &[a], &[b], p, opts)?)
}

/// `C_p^{G_n}({w^i(n)}, {w^j(n)})` between the cells containing the fixed
/// points `p_i` and `p_j`.
pub fn corner_cell_conductance(n: usize, i: u8, j: u8, p: f64, opts: &SolverOptions) -> Result<f64> {
    if i == j {
        return Err(CarpetError::CoincidentPoints);
    }
    let g = build_cell_graph(n, CellAdjacency::Full)?;
    let cell = |s: u8| -> Result<u32> {
        let w = Word::new(&vec![s; n])?;
        Ok(g.index_of(&w).expect("full word space"))
    };
    conductance(g.graph(), &[cell(i)?], &[cell(j)?], p, opts)
}

/// Conductance family tabulated by [`estimate_rho`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScalingFamily {
    /// `C_p^{(n)}(L↔R)` on `G_n`.
    Lr,
    /// Left/right conductance on `𝔾_n`.
    LrPoint,
    /// `C_p^{(n,M)}`.
    Chain { copies: usize },
    /// Neighbourhood conductance scanned to the given ambient depth.
    Neighborhood { depth: usize },
    /// `1 / R_p^{𝔾_n}(p_8, p̂_0)`.
    PointPair,
}

impl ScalingFamily {
    pub fn value(self, n: usize, p: f64, opts: &SolverOptions) -> Result<f64> {
        match self {
            ScalingFamily::Lr => conductance_lr(n, p, GraphFamily::Cell, opts),
            ScalingFamily::LrPoint => conductance_lr(n, p, GraphFamily::Point, opts),
            ScalingFamily::Chain { copies } => conductance_chain(n, copies, p, opts),
            ScalingFamily::Neighborhood { depth } => Ok(conductance_neighborhood(n, p, depth, opts)?.value),
            ScalingFamily::PointPair => {
                let (x, y) = standard_point_pair(0)?;
                Ok(1.0 / point_resistance(n, &x, &y, p, opts)?)
            }
        }
    }
}

impl fmt::Display for ScalingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingFamily::Lr => write!(f, "lr"),
            ScalingFamily::LrPoint => write!(f, "lr-point"),
            ScalingFamily::Chain { copies } => write!(f, "chain-{copies}"),
            ScalingFamily::Neighborhood { depth } => write!(f, "neighborhood-{depth}"),
            ScalingFamily::PointPair => write!(f, "point-pair"),
        }
    }
}

impl FromStr for ScalingFamily {
    type Err = CarpetError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CarpetError::InvalidArgument(format!("unknown family {s:?}"));
        let suffix = |prefix: &str| -> Option<usize> { s.strip_prefix(prefix)?.parse().ok() };
        match s {
            "lr" => Ok(ScalingFamily::Lr),
            "lr-point" => Ok(ScalingFamily::LrPoint),
            "point-pair" => Ok(ScalingFamily::PointPair),
            _ => {
                if let Some(copies) = suffix("chain-") {
                    if copies >= 2 {
                        return Ok(ScalingFamily::Chain { copies });
                    }
                } else if let Some(depth) = suffix("neighborhood-") {
                    if (1..=2).contains(&depth) {
                        return Ok(ScalingFamily::Neighborhood { depth });
                    }
                }
                Err(bad())
            }
        }
    }
}

impl TryFrom<String> for ScalingFamily {
    type Error = CarpetError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ScalingFamily> for String {
    fn from(f: ScalingFamily) -> String {
        f.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub value: Option<f64>,
    pub error: Option<String>,
    pub wall_ms: u64,
}

/// Values of one conductance family over a range of levels, with both
/// estimators of `ρ_p` and the derived `β_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub p: f64,
    pub family: ScalingFamily,
    pub n_min: usize,
    pub n_max: usize,
    pub rows: Vec<ScalingRow>,
    /// `value_n / value_{n+1}` for consecutive successful rows, keyed by `n`.
    pub ratios: Vec<(usize, f64)>,
    pub rho_hat_ratio: Option<f64>,
    pub rho_hat_fit: Option<f64>,
    pub beta_hat_ratio: Option<f64>,
    pub beta_hat_fit: Option<f64>,
    /// `max C^{(n+m)} / (C^{(n)} C^{(m)})` over levels present in the table.
    pub submultiplicativity: Option<f64>,
    pub options: SolverOptions,
}

impl ScalingTable {
    /// Assembles a table and its estimators from already computed rows.
    pub fn from_rows(p: f64, family: ScalingFamily, n_min: usize, n_max: usize, rows: Vec<ScalingRow>, opts: &SolverOptions) -> Self {
        let ok: Vec<(usize, f64)> = rows
            .iter()
            .filter_map(|r| r.value.filter(|v| *v > 0.0).map(|v| (r.n, v)))
            .collect();
        let ratios: Vec<(usize, f64)> = ok
            .windows(2)
            .filter(|w| w[1].0 == w[0].0 + 1)
            .map(|w| (w[0].0, w[0].1 / w[1].1))
            .collect();
        let rho_hat_ratio = ratios.last().map(|r| r.1);
        let rho_hat_fit = (ok.len() >= 2).then(|| {
            let k = ok.len() as f64;
            let mx = ok.iter().map(|r| r.0 as f64).sum::<f64>() / k;
            let my = ok.iter().map(|r| -r.1.ln()).sum::<f64>() / k;
            let sxy: f64 = ok.iter().map(|r| (r.0 as f64 - mx) * (-r.1.ln() - my)).sum();
            let sxx: f64 = ok.iter().map(|r| (r.0 as f64 - mx).powi(2)).sum();
            (sxy / sxx).exp()
        });
        let lookup: BTreeMap<usize, f64> = ok.iter().copied().collect();
        let submultiplicativity = lookup
            .iter()
            .flat_map(|(&a, &ca)| {
                lookup.iter().filter(move |(&b, _)| b >= a).filter_map({
                    let lookup = &lookup;
                    move |(&b, &cb)| lookup.get(&(a + b)).map(|&cab| cab / (ca * cb))
                })
            })
            .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
        ScalingTable {
            p,
            family,
            n_min,
            n_max,
            rows,
            ratios,
            rho_hat_ratio,
            rho_hat_fit,
            beta_hat_ratio: rho_hat_ratio.map(walk_dimension),
            beta_hat_fit: rho_hat_fit.map(walk_dimension),
            submultiplicativity,
            options: opts.clone(),
        }
    }

    /// Successful `(n, value)` pairs.
    pub fn values(&self) -> Vec<(usize, f64)> {
        self.rows.iter().filter_map(|r| r.value.map(|v| (r.n, v))).collect()
    }

    pub fn all_failed(&self) -> bool {
        self.rows.iter().all(|r| r.value.is_none())
    }
}

/// Tabulates `family` for `n_min..=n_max`; failed rows are recorded, not fatal.
pub fn estimate_rho(p: f64, family: ScalingFamily, n_min: usize, n_max: usize, opts: &SolverOptions) -> Result<ScalingTable> {
    if n_min == 0 || n_max < n_min + 2 {
        return Err(CarpetError::InvalidArgument(
            "need 1 <= n_min and n_max >= n_min + 2".into(),
        ));
    }
    let rows: Vec<ScalingRow> = (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let clock = Instant::now();
            let result = family.value(n, p, opts);
            let wall_ms = clock.elapsed().as_millis() as u64;
            match result {
                Ok(v) => ScalingRow {
                    n,
                    value: Some(v),
                    error: None,
                    wall_ms,
                },
                Err(e) => ScalingRow {
                    n,
                    value: None,
                    error: Some(e.to_string()),
                    wall_ms,
                },
            }
        })
        .collect();
    Ok(ScalingTable::from_rows(p, family, n_min, n_max, rows, opts))
}

/// Shift added before rescaling the copy in cell `i`: the left column gets
/// 2, the middle column 1 and the right column 0, so that the pasted
/// function is 1 on the left side and 0 on the right side.
pub fn column_shift(i: u8) -> Result<f64> {
    match i {
        1 | 7 | 8 => Ok(2.0),
        2 | 6 => Ok(1.0),
        3..=5 => Ok(0.0),
        _ => Err(CarpetError::InvalidSymbol(i)),
    }
}

/// One pasting step `h ↦ Σ_i (F_i)_*((h + s_i)/3)` from `coarse` to `fine`.
pub fn paste_columns(coarse: &PointGraph, fine: &PointGraph, h: &[f64]) -> Result<Vec<f64>> {
    if fine.level() != coarse.level() + 1 || fine.kind() != coarse.kind() {
        return Err(CarpetError::InvalidLevel("pasting needs consecutive levels".into()));
    }
    if h.len() != coarse.graph().vertex_count() {
        return Err(CarpetError::Misaligned("function length".into()));
    }
    let mut out = vec![f64::NAN; fine.graph().vertex_count()];
    for i in 1..=8u8 {
        let s = column_shift(i)?;
        for (u, &v) in coarse.embed_into(fine, i)?.iter().enumerate() {
            let value = (h[u] + s) / 3.0;
            let slot = &mut out[v as usize];
            if slot.is_nan() {
                *slot = value;
            } else if slot.to_bits() != value.to_bits() {
                return Err(CarpetError::GlueMismatch(v));
            }
        }
    }
    if out.iter().any(|v| v.is_nan()) {
        return Err(CarpetError::Misaligned("pasting left a vertex unset".into()));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HnResult {
    pub level: usize,
    pub depth: usize,
    pub function: GraphFunction,
    /// Energy of the base minimizer on `𝔾_{n-k}`.
    pub base_energy: f64,
    pub energy: f64,
}

/// `ĥ_k` on `𝔾_n`: the left/right minimizer on `𝔾_{n-k}` (made exactly
/// symmetric under the horizontal reflection when `k > 0`, so copies glue
/// across horizontal interfaces) pasted `k` times.
pub fn build_hn(n: usize, k: usize, p: f64, opts: &SolverOptions) -> Result<HnResult> {
    if k >= n {
        return Err(CarpetError::InvalidLevel(format!(
            "depth {k} needs a base level n - k >= 1, got n = {n}"
        )));
    }
    let base = build_point_graph(n - k, PointKind::Modified)?;
    let report = lr_point_report(&base, p, opts)?;
    converged_energy(&report, "base minimizer")?;
    let mut h = report.minimizer.values;
    if k > 0 {
        let perm = base.symmetry_permutation(SymmetryElement::ReflectHorizontal)?;
        h = (0..h.len()).map(|v| 0.5 * (h[v] + h[perm[v] as usize])).collect();
    }
    let base_energy = energy_of(base.graph(), &h, p);
    let mut coarse = base;
    for level in n - k + 1..=n {
        let fine = build_point_graph(level, PointKind::Modified)?;
        h = paste_columns(&coarse, &fine, &h)?;
        coarse = fine;
    }
    let energy = energy_of(coarse.graph(), &h, p);
    Ok(HnResult {
        level: n,
        depth: k,
        function: GraphFunction::new(coarse.graph(), h)?,
        base_energy,
        energy,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrictnessReport {
    pub n: usize,
    pub p: f64,
    /// `1 - C^{𝔾_n} / (64·3^{-2p}·C^{𝔾_{n-2}})`.
    pub gap: f64,
    pub conductance: f64,
    pub coarse_conductance: f64,
    /// Energy of `ĥ_2`, equal to `64·3^{-2p}·C^{𝔾_{n-2}}` up to symmetrisation.
    pub pasted_energy: f64,
}

pub fn strictness_gap(n: usize, p: f64, opts: &SolverOptions) -> Result<StrictnessReport> {
    if n < 3 {
        return Err(CarpetError::InvalidLevel("strictness needs n >= 3".into()));
    }
    let fine = conductance_lr(n, p, GraphFamily::Point, opts)?;
    let coarse = conductance_lr(n - 2, p, GraphFamily::Point, opts)?;
    let predicted = 64.0 * 3f64.powf(-2.0 * p) * coarse;
    let pasted = build_hn(n, 2, p, opts)?;
    Ok(StrictnessReport {
        n,
        p,
        gap: 1.0 - fine / predicted,
        conductance: fine,
        coarse_conductance: coarse,
        pasted_energy: pasted.energy,
    })
}
