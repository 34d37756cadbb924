//! Finite-level measures on the carpet: the point-counting measures `μ_n`,
//! the energy measures `m^{p,n}_{<f>}`, a chain-rule diagnostic, the
//! Besov-type seminorms `A_{p,β}^{(n)}` and empirical Hölder constants.

use std::collections::HashMap;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carpet::{pow3, Word};
use crate::energy::{abs_pow, containing_cells_of_points, CompensatedSum, GraphFunction};
use crate::error::{CarpetError, Result};
use crate::graphs::{build_point_graph, CarpetGraph, PointGraph, PointKind};
use crate::scaling::hausdorff_dimension;

/// Uniform probability measure on `V(𝔾*_n)`.
#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    graph: PointGraph,
}

pub fn discrete_measure(n: usize) -> Result<DiscreteMeasure> {
    Ok(DiscreteMeasure {
        graph: build_point_graph(n, PointKind::Simple)?,
    })
}

/// Masses of the level-`m` cells, indexed by word code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMasses {
    pub level: usize,
    /// `μ_n(K_w)`: share of points in the closed cell; boundary points count
    /// for every cell containing them, so these sum to more than 1.
    pub closed: Vec<f64>,
    /// Each point's mass split evenly among its containing cells; sums to 1.
    pub split: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn level(&self) -> usize {
        self.graph.level()
    }

    pub fn graph(&self) -> &PointGraph {
        &self.graph
    }

    pub fn weights(&self) -> Vec<f64> {
        let count = self.graph.graph().vertex_count();
        vec![1.0 / count as f64; count]
    }

    pub fn cell_masses(&self, m: usize) -> Result<CellMasses> {
        let cells = containing_cells_of_points(&self.graph, m)?;
        let total = cells.len() as f64;
        let mut closed = vec![0.0; 1 << (3 * m)];
        let mut split = vec![0.0; 1 << (3 * m)];
        for cs in &cells {
            for &c in cs {
                closed[c as usize] += 1.0 / total;
                split[c as usize] += 1.0 / (total * cs.len() as f64);
            }
        }
        Ok(CellMasses {
            level: m,
            closed,
            split,
        })
    }
}

/// Cylinder masses of a finite-level energy measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMeasure {
    pub level: usize,
    pub rho: f64,
    /// `(w, mass(w))` for every `w ∈ W_level`, in word order.
    pub entries: Vec<(Word, f64)>,
    pub total: f64,
}

impl CellMeasure {
    pub fn mass(&self, w: &Word) -> Option<f64> {
        (w.len() == self.level).then(|| self.entries[w.code() as usize].1)
    }

    /// Masses summed over parents one level up.
    pub fn aggregate(&self) -> Result<CellMeasure> {
        if self.level == 0 {
            return Err(CarpetError::InvalidLevel("level 0 has no parent level".into()));
        }
        let level = self.level - 1;
        let entries: Vec<(Word, f64)> = self
            .entries
            .chunks(8)
            .enumerate()
            .map(|(code, chunk)| {
                let mass = chunk.iter().map(|e| e.1).collect::<CompensatedSum>().value();
                (Word::from_code(level, code as u64).expect("in range"), mass)
            })
            .collect();
        Ok(CellMeasure {
            level,
            rho: self.rho,
            total: entries.iter().map(|e| e.1).collect::<CompensatedSum>().value(),
            entries,
        })
    }
}

/// `mass(w) = ρ^{n+m} E_p^{𝔾_m}(F_w^* f)`: edges of `𝔾_{n+m}` grouped by
/// their level-`n` owner cell. The total is `ρ^{n+m} E_p^{𝔾_{n+m}}(f)`.
pub fn energy_measure(g: &PointGraph, f: &GraphFunction, cell_level: usize, p: f64, rho: f64) -> Result<CellMeasure> {
    crate::energy::check_exponent(p)?;
    f.check(g.graph())?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(CarpetError::InvalidRho(rho));
    }
    let level = g.level();
    if cell_level >= level {
        return Err(CarpetError::InvalidLevel(format!(
            "cell level {cell_level} must be below the graph level {level}"
        )));
    }
    let mut sums = vec![CompensatedSum::default(); 1 << (3 * cell_level)];
    for (&[a, b], owner) in g.graph().edges().iter().zip(g.cell_of_edge()) {
        let t = f.values[a as usize] - f.values[b as usize];
        sums[owner.prefix(cell_level).code() as usize].add(abs_pow(t, p));
    }
    let scale = rho.powi(level as i32);
    let entries: Vec<(Word, f64)> = sums
        .iter()
        .enumerate()
        .map(|(code, s)| (Word::from_code(cell_level, code as u64).expect("in range"), scale * s.value()))
        .collect();
    let total = scale * sums.iter().map(CompensatedSum::value).collect::<CompensatedSum>().value();
    Ok(CellMeasure {
        level: cell_level,
        rho,
        entries,
        total,
    })
}

/// Smooth scalar maps for the chain-rule diagnostic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarMap {
    Identity,
    Affine { a: f64, b: f64 },
    /// `t ↦ t^k`.
    Power(i32),
    Sin,
    Exp,
}

impl ScalarMap {
    pub fn value(self, t: f64) -> f64 {
        match self {
            ScalarMap::Identity => t,
            ScalarMap::Affine { a, b } => a * t + b,
            ScalarMap::Power(k) => t.powi(k),
            ScalarMap::Sin => t.sin(),
            ScalarMap::Exp => t.exp(),
        }
    }

    pub fn derivative(self, t: f64) -> f64 {
        match self {
            ScalarMap::Identity => 1.0,
            ScalarMap::Affine { a, .. } => a,
            ScalarMap::Power(0) => 0.0,
            ScalarMap::Power(k) => f64::from(k) * t.powi(k - 1),
            ScalarMap::Sin => t.cos(),
            ScalarMap::Exp => t.exp(),
        }
    }
}

impl FromStr for ScalarMap {
    type Err = CarpetError;

    /// `identity`, `square`, `cube`, `sin`, `exp`, `power:K` or `affine:A,B`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || CarpetError::InvalidArgument(format!("unknown scalar map {s:?}"));
        match s {
            "identity" => return Ok(ScalarMap::Identity),
            "square" => return Ok(ScalarMap::Power(2)),
            "cube" => return Ok(ScalarMap::Power(3)),
            "sin" => return Ok(ScalarMap::Sin),
            "exp" => return Ok(ScalarMap::Exp),
            _ => {}
        }
        if let Some(k) = s.strip_prefix("power:") {
            return k.parse().map(ScalarMap::Power).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix("affine:") {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b.trim().parse().map_err(|_| bad())?;
            return Ok(ScalarMap::Affine { a, b });
        }
        Err(bad())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRuleLevel {
    pub level: usize,
    pub max_discrepancy: f64,
    /// Mean discrepancy weighted by `mass_f`.
    pub mean_discrepancy: f64,
    /// Mean discrepancy with `Φ'` taken at the cell minimum and maximum.
    pub band: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRuleReport {
    pub p: f64,
    pub map: ScalarMap,
    pub levels: Vec<ChainRuleLevel>,
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Compares `mass_{Φ∘f}(w)` with `|Φ'(f̄_w)|^p mass_f(w)` cell by cell.
pub fn chain_rule_check(g: &PointGraph, f: &GraphFunction, map: ScalarMap, p: f64, levels: &[usize]) -> Result<ChainRuleReport> {
    f.check(g.graph())?;
    let phi_f = GraphFunction::new(g.graph(), f.values.iter().map(|&t| map.value(t)).collect())?;
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let base = energy_measure(g, f, level, p, 1.0)?;
        let image = energy_measure(g, &phi_f, level, p, 1.0)?;
        let count = 1usize << (3 * level);
        let mut sums = vec![CompensatedSum::default(); count];
        let mut hits = vec![0usize; count];
        let mut lo = vec![f64::INFINITY; count];
        let mut hi = vec![f64::NEG_INFINITY; count];
        for (v, cells) in containing_cells_of_points(g, level)?.iter().enumerate() {
            let t = f.values[v];
            for &c in cells {
                let c = c as usize;
                sums[c].add(t);
                hits[c] += 1;
                lo[c] = lo[c].min(t);
                hi[c] = hi[c].max(t);
            }
        }
        let mut max_discrepancy: f64 = 0.0;
        let mut weighted = [CompensatedSum::default(), CompensatedSum::default(), CompensatedSum::default()];
        let total = base.total;
        for c in 0..count {
            let mass_f = base.entries[c].1;
            let mass_phi = image.entries[c].1;
            let mean = sums[c].value() / hits[c].max(1) as f64;
            let gaps = [mean, lo[c], hi[c]].map(|t| relative_gap(mass_phi, abs_pow(map.derivative(t), p) * mass_f));
            max_discrepancy = max_discrepancy.max(gaps[0]);
            if total > 0.0 {
                for (acc, gap) in weighted.iter_mut().zip(gaps) {
                    acc.add(gap * mass_f / total);
                }
            }
        }
        let [mean, at_min, at_max] = weighted.map(|s| s.value());
        out.push(ChainRuleLevel {
            level,
            max_discrepancy,
            mean_discrepancy: mean,
            band: (at_min.min(at_max), at_min.max(at_max)),
        });
    }
    Ok(ChainRuleReport { p, map, levels: out })
}

/// Radius constant `c = 3√2` of the Besov balls `B(x, c·3^{-n})`.
pub const BESOV_RADIUS: f64 = 3.0 * std::f64::consts::SQRT_2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovReport {
    pub p: f64,
    pub beta: f64,
    pub n: usize,
    pub value: f64,
    pub c_radius: f64,
    pub m: usize,
}

/// `∫ ⨍_{B(x, c 3^{-n})} |f(x) - f(y)|^p dμ_m(y) dμ_m(x)`, the Besov
/// integrand without the `3^{βn}` factor.
pub fn besov_oscillation(g: &PointGraph, f: &GraphFunction, p: f64, n: usize) -> Result<f64> {
    f.check(g.graph())?;
    crate::energy::check_exponent(p)?;
    let m = g.level();
    if m <= n {
        return Err(CarpetError::InvalidLevel(format!(
            "the measure level {m} must exceed the scale index {n}"
        )));
    }
    // Lattice side is 4·3^m, so (c·3^{-n})² = 18·9^{-n} becomes 288·9^{m-n}.
    let r2 = 288 * pow3(2 * (m - n) as u32);
    let bucket = (r2 as f64).sqrt().ceil() as i64;
    let points = g.points();
    let half = 2 * pow3(m as u32);
    let key = |x: i64, y: i64| ((x + half) / bucket, (y + half) / bucket);
    let mut buckets: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
    for (i, pt) in points.iter().enumerate() {
        buckets.entry(key(pt.x, pt.y)).or_default().push(i as u32);
    }
    let inner: Vec<f64> = points
        .par_iter()
        .enumerate()
        .map(|(i, pt)| {
            let (bx, by) = key(pt.x, pt.y);
            let fx = f.values[i];
            let mut acc = CompensatedSum::default();
            let mut count = 0usize;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let Some(list) = buckets.get(&(bx + dx, by + dy)) else { continue };
                    for &j in list {
                        let q = &points[j as usize];
                        let (ex, ey) = (q.x - pt.x, q.y - pt.y);
                        if ex * ex + ey * ey <= r2 {
                            acc.add(abs_pow(fx - f.values[j as usize], p));
                            count += 1;
                        }
                    }
                }
            }
            acc.value() / count as f64
        })
        .collect();
    Ok(inner.iter().copied().collect::<CompensatedSum>().value() / points.len() as f64)
}

/// `A_{p,β}^{(n)}(f)` discretised with `μ_m` in both integrals, `m` the level
/// of `g`.
pub fn besov_seminorm(g: &PointGraph, f: &GraphFunction, p: f64, beta: f64, n: usize) -> Result<BesovReport> {
    let osc = besov_oscillation(g, f, p, n)?;
    Ok(BesovReport {
        p,
        beta,
        n,
        value: 3f64.powf(beta * n as f64) * osc,
        c_radius: BESOV_RADIUS,
        m: g.level(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSweep {
    pub p: f64,
    pub m: usize,
    /// `(n, oscillation)`.
    pub oscillations: Vec<(usize, f64)>,
    /// `(β, A_{p,β}^{(n)} for each n)`.
    pub values: Vec<(f64, Vec<f64>)>,
    /// Largest swept `β` whose seminorm does not grow between the two finest
    /// scales, and smallest one whose seminorm grows.
    pub bracket: (Option<f64>, Option<f64>),
    /// Exponent at which the two finest scales give equal seminorms.
    pub critical_estimate: f64,
}

/// Evaluates the seminorm for every `β` in `betas` and scale in `scales`
/// (at least two, increasing) and brackets the critical exponent.
pub fn besov_sweep(g: &PointGraph, f: &GraphFunction, p: f64, scales: &[usize], betas: &[f64]) -> Result<BesovSweep> {
    if scales.len() < 2 || scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CarpetError::InvalidArgument("need at least two increasing scales".into()));
    }
    let oscillations = scales
        .iter()
        .map(|&n| besov_oscillation(g, f, p, n).map(|o| (n, o)))
        .collect::<Result<Vec<_>>>()?;
    let [(n0, o0), (n1, o1)] = [oscillations[oscillations.len() - 2], oscillations[oscillations.len() - 1]];
    let critical_estimate = -(o1 / o0).ln() / ((n1 - n0) as f64 * 3f64.ln());
    let mut sorted = betas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let values: Vec<(f64, Vec<f64>)> = sorted
        .iter()
        .map(|&b| (b, oscillations.iter().map(|&(n, o)| 3f64.powf(b * n as f64) * o).collect()))
        .collect();
    let grows = |v: &[f64]| v[v.len() - 1] > v[v.len() - 2];
    let lo = values.iter().rev().find(|(_, v)| !grows(v)).map(|(b, _)| *b);
    let hi = values.iter().find(|(_, v)| grows(v)).map(|(b, _)| *b);
    Ok(BesovSweep {
        p,
        m: g.level(),
        oscillations,
        values,
        bracket: (lo, hi),
        critical_estimate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub p: f64,
    pub beta_hat: f64,
    /// `max |f(x)-f(y)|^p / (energy · d(x,y)^{β-α})` over the sampled pairs.
    pub ratio: f64,
    pub pairs: usize,
}

/// Empirical Hölder constant of `f` on a point graph. All pairs are used
/// when there are at most `max_pairs`, otherwise a seeded sample.
pub fn holder_check(g: &PointGraph, f: &GraphFunction, p: f64, beta_hat: f64, energy: f64, max_pairs: usize, seed: u64) -> Result<HolderReport> {
    f.check(g.graph())?;
    let alpha = hausdorff_dimension();
    if beta_hat <= alpha {
        return Err(CarpetError::SubcriticalWalkDimension { beta: beta_hat, alpha });
    }
    if !(energy > 0.0) {
        return Err(CarpetError::InvalidArgument("energy must be positive".into()));
    }
    let pts: Vec<(f64, f64)> = g.points().iter().map(|q| q.to_f64()).collect();
    let k = pts.len();
    let exponent = beta_hat - alpha;
    let ratio_of = |i: usize, j: usize| -> f64 {
        let d = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
        abs_pow(f.values[i] - f.values[j], p) / (energy * d.powf(exponent))
    };
    let all_pairs = k * (k - 1) / 2;
    let (ratio, pairs) = if all_pairs <= max_pairs {
        let r = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .map(|(i, j)| ratio_of(i, j))
            .fold(0.0, f64::max);
        (r, all_pairs)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r: f64 = 0.0;
        for _ in 0..max_pairs {
            let i = rng.gen_range(0..k);
            let mut j = rng.gen_range(0..k - 1);
            if j >= i {
                j += 1;
            }
            r = r.max(ratio_of(i, j));
        }
        (r, max_pairs)
    };
    Ok(HolderReport {
        p,
        beta_hat,
        ratio,
        pairs,
    })
}
