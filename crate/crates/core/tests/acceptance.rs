//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use carpet_core::carpet::{SymmetryElement, Word};
use carpet_core::energy::{clamp_unit, coarsen, p_energy, p_energy_gradient, pullback_cell, pullback_symmetry, GraphFunction};
use carpet_core::graphs::{
    build_cell_graph, build_chain_graph, build_point_graph, CarpetGraph, CellAdjacency, Graph, PointGraph, PointKind,
};
use carpet_core::measures::{besov_sweep, energy_measure};
use carpet_core::poincare::{lambda, lambda_star, relation_table, sigma, sigma_graph};
use carpet_core::scaling::{
    conductance_chain, conductance_lr, corner_cell_conductance, estimate_rho, half_chain_minimum, point_resistance,
    standard_point_pair, strictness_gap, GraphFamily, ScalingFamily, ScalingTable,
};
use carpet_core::solver::{
    conductance, conductance_report, harmonic_oracle, solve, solve_dirichlet, ConstraintSpec, Init, SolverOptions,
};
use common::*;
use rand::Rng;
use rayon::prelude::*;

const ORACLE_REL: f64 = 1e-6;
const ITERATIVE_REL: f64 = 1e-8;
const IDENTITY_REL: f64 = 1e-12;
/// Slack for inequalities between two solver outputs, each accurate to the
/// KKT tolerance.
const SOLVER_SLACK: f64 = 1e-7;
const RANDOM_INSTANCES: usize = 100;
/// Above 1, so it also certifies `rho_2 > 1`.
const RHO2_FLOOR: f64 = 9.0 / 8.0 * 0.9;
const RHO3_FLOOR: f64 = 27.0 / 8.0 * 0.9;
const RHO_LOW_CEILING: f64 = 1.05;
const GAP_STABILITY: f64 = 0.2;
const SPREAD_LIMIT: f64 = 4.0;
const FD_STEP: f64 = 1e-6;
const FD_REL: f64 = 1e-5;
const UNIQUENESS: f64 = 1e-6;
const BESOV_WINDOW: f64 = 0.1;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn check_rel(what: &str, value: f64, oracle: f64, tol: f64) -> Result<(), String> {
    ensure(rel(value, oracle) < tol, || format!("{what}: {value} vs {oracle}"))
}

fn criterion_1() -> Verdict {
    let o = opts();
    let mut checks = 0;
    for n in 1..=3 {
        let g = build_cell_graph(n, CellAdjacency::Full).map_err(err)?;
        let (left, right) = (g.subset("left").map_err(err)?, g.subset("right").map_err(err)?);
        let v = conductance_lr(n, 2.0, GraphFamily::Cell, &o).map_err(err)?;
        check_rel(&format!("cell L-R n={n}"), v, dense_conductance(g.graph(), left, right), ORACLE_REL)?;

        let pg = build_point_graph(n, PointKind::Modified).map_err(err)?;
        let v = conductance_lr(n, 2.0, GraphFamily::Point, &o).map_err(err)?;
        let oracle = dense_conductance(pg.graph(), pg.subset("left").map_err(err)?, pg.subset("right").map_err(err)?);
        check_rel(&format!("point L-R n={n}"), v, oracle, ORACLE_REL)?;

        let (x, y) = standard_point_pair(0).map_err(err)?;
        let (a, b) = (pg.index_of(&x).unwrap(), pg.index_of(&y).unwrap());
        let v = point_resistance(n, &x, &y, 2.0, &o).map_err(err)?;
        check_rel(&format!("point pair n={n}"), v, 1.0 / dense_conductance(pg.graph(), &[a], &[b]), ORACLE_REL)?;

        let corner = |s: u8| g.index_of(&Word::new(&vec![s; n]).unwrap()).unwrap();
        for (i, j) in [(1u8, 3u8), (1, 5)] {
            let v = corner_cell_conductance(n, i, j, 2.0, &o).map_err(err)?;
            let oracle = dense_conductance(g.graph(), &[corner(i)], &[corner(j)]);
            check_rel(&format!("corner cells n={n}"), v, oracle, ORACLE_REL)?;
        }
        for copies in 2..=4 {
            let c = build_chain_graph(n, copies).map_err(err)?;
            let v = conductance_chain(n, copies, 2.0, &o).map_err(err)?;
            check_rel(&format!("chain n={n} M={copies}"), v, dense_conductance(c.graph(), c.left(), c.right()), ORACLE_REL)?;
        }

        let result = lambda(n, 2.0, &o).map_err(err)?;
        check_rel(&format!("lambda n={n}"), result.value, dense_lambda(g.graph(), 8f64.powi(-(n as i32))), ORACLE_REL)?;

        if n >= 2 {
            let all: Vec<u32> = (0..g.graph().vertex_count() as u32).collect();
            let (_, e) = dense_mean_constrained(g.graph(), g.subset("boundary").map_err(err)?, &[(all, 1.0)]);
            let v = lambda_star(n, 2.0, &o).map_err(err)?.value;
            check_rel(&format!("lambda* n={n}"), v, 1.0 / e, ORACLE_REL)?;
        }

        let sg = sigma_graph(n).map_err(err)?;
        let block = 1u32 << (3 * n);
        let means = [((0..block).collect(), 1.0), ((block..2 * block).collect(), 0.0)];
        let (_, e) = dense_mean_constrained(sg.graph(), &[], &means);
        let v = sigma(n, 2.0, &o).map_err(err)?.value;
        check_rel(&format!("sigma n={n}"), v, 1.0 / e, ORACLE_REL)?;
        checks += 10 + usize::from(n >= 2);
    }
    for n in 4..=5 {
        let g = build_cell_graph(n, CellAdjacency::Full).map_err(err)?;
        let fixed: BTreeMap<u32, f64> = g
            .subset("left")
            .map_err(err)?
            .iter()
            .map(|&v| (v, 1.0))
            .chain(g.subset("right").map_err(err)?.iter().map(|&v| (v, 0.0)))
            .collect();
        let (_, reference) = harmonic_oracle(g.graph(), &fixed, 1e-14).map_err(err)?;
        let v = conductance_lr(n, 2.0, GraphFamily::Cell, &o).map_err(err)?;
        check_rel(&format!("iterative L-R n={n}"), v, reference, ITERATIVE_REL)?;
        checks += 1;
    }
    Ok(format!("{checks} values within {ORACLE_REL:e} (dense) / {ITERATIVE_REL:e} (iterative)"))
}

fn random_function(g: &Graph, seed: u64) -> GraphFunction {
    let mut r = rng(seed);
    GraphFunction::new(g, random_values(&mut r, g.vertex_count())).unwrap()
}

fn criterion_2() -> Verdict {
    for n in 1..=5 {
        let count = build_cell_graph(n, CellAdjacency::Full).map_err(err)?.graph().vertex_count() as u64;
        ensure(count == 8u64.pow(n as u32), || format!("#W_{n} = {count}"))?;
    }
    for n in 1..=8usize {
        let k = n as u32 - 1;
        let expected = (12 * 8u64.pow(k) + 8 * 3u64.pow(k)) / 5;
        let built = PointGraph::build(n, PointKind::Simple, 10_000_000).map_err(err)?.graph().vertex_count() as u64;
        ensure(built == expected, || format!("simple point graph n={n}: {built} vs {expected}"))?;
    }
    for kind in [PointKind::Modified, PointKind::Simple] {
        for n in 1..=3 {
            let coarse = build_point_graph(n, kind).map_err(err)?;
            let fine = build_point_graph(n + 1, kind).map_err(err)?;
            for (seed, p) in [(1, 1.5), (2, 2.0), (3, 3.0)] {
                let f = random_function(fine.graph(), seed);
                let whole = p_energy(fine.graph(), &f, p).map_err(err)?;
                let mut parts = 0.0;
                for i in 1..=8u8 {
                    let local = pullback_cell(&fine, &coarse, &f, i).map_err(err)?;
                    parts += p_energy(coarse.graph(), &local, p).map_err(err)?;
                }
                ensure(rel(parts, whole) < IDENTITY_REL, || format!("decomposition {kind:?} n={n}: {parts} vs {whole}"))?;
            }
        }
    }
    for (level, p, rho) in [(3, 2.0, 1.25), (4, 1.5, 1.0), (4, 3.0, 3.0)] {
        let g = build_point_graph(level, PointKind::Modified).map_err(err)?;
        let f = random_function(g.graph(), level as u64);
        let raw = p_energy(g.graph(), &f, p).map_err(err)?;
        for n in 1..level {
            let fine = energy_measure(&g, &f, n, p, rho).map_err(err)?;
            let coarse = energy_measure(&g, &f, n - 1, p, rho).map_err(err)?;
            let scaled = rho.powi(level as i32) * raw;
            ensure(rel(fine.total, scaled) < IDENTITY_REL, || format!("measure total level={level} n={n}"))?;
            let parents = fine.aggregate().map_err(err)?;
            for (a, b) in parents.entries.iter().zip(&coarse.entries) {
                ensure((a.1 - b.1).abs() <= IDENTITY_REL * scaled, || format!("aggregation at {}", b.0))?;
            }
        }
    }
    let top = 4;
    let g = build_cell_graph(top, CellAdjacency::Full).map_err(err)?;
    let f = random_function(g.graph(), 99);
    for mid in 1..top {
        let gm = build_cell_graph(mid, CellAdjacency::Full).map_err(err)?;
        let averaged = coarsen(&g, &f, mid).map_err(err)?;
        for n in 0..=mid {
            let two_step = coarsen(&gm, &averaged, n).map_err(err)?;
            let direct = coarsen(&g, &f, n).map_err(err)?;
            ensure(two_step.max_abs_diff(&direct) <= IDENTITY_REL, || format!("coarsening {top}->{mid}->{n}"))?;
        }
    }
    Ok("counts, decomposition, measure and coarsening identities hold".into())
}

fn random_exponent(r: &mut impl Rng) -> f64 {
    r.gen_range(1.1..4.0)
}

fn criterion_3() -> Verdict {
    let o = opts();
    let mut r = rng(2024);
    let pg = build_point_graph(2, PointKind::Modified).map_err(err)?;
    let g2 = build_cell_graph(2, CellAdjacency::Full).map_err(err)?;

    for k in 0..RANDOM_INSTANCES {
        let p = random_exponent(&mut r);
        let values: Vec<f64> = random_values(&mut r, pg.graph().vertex_count()).iter().map(|v| 1.5 * v).collect();
        let f = GraphFunction::new(pg.graph(), values).map_err(err)?;
        let e = p_energy(pg.graph(), &f, p).map_err(err)?;
        let clamped = p_energy(pg.graph(), &clamp_unit(&f), p).map_err(err)?;
        ensure(clamped <= e * (1.0 + IDENTITY_REL), || format!("Markov instance {k}"))?;
    }

    let count = g2.graph().vertex_count();
    let mut instances = Vec::new();
    while instances.len() < RANDOM_INSTANCES {
        let labels: Vec<u8> = (0..count).map(|_| r.gen_range(0..5)).collect();
        let pick = |ls: &[u8]| -> Vec<u32> { (0..count as u32).filter(|&v| ls.contains(&labels[v as usize])).collect() };
        let (a, b) = (pick(&[2]), pick(&[4]));
        if !a.is_empty() && !b.is_empty() {
            instances.push((a, pick(&[1, 2]), b, pick(&[3, 4]), random_exponent(&mut r)));
        }
    }
    instances.par_iter().enumerate().try_for_each(|(k, (a, big_a, b, big_b, p))| {
        let small = conductance(g2.graph(), a, b, *p, &o).map_err(err)?;
        let large = conductance(g2.graph(), big_a, big_b, *p, &o).map_err(err)?;
        ensure(small <= large * (1.0 + SOLVER_SLACK), || format!("monotonicity instance {k}: {small} > {large}"))
    })?;

    let g1 = build_cell_graph(1, CellAdjacency::Full).map_err(err)?;
    let mut triples = 0;
    for graph in [g1.graph(), pg.graph()] {
        for p in [1.5, 2.0, 3.0] {
            let n = graph.vertex_count() as u32;
            let pairs: Vec<(u32, u32)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            let dist: Vec<f64> = pairs
                .par_iter()
                .map(|&(a, b)| conductance(graph, &[a], &[b], p, &o).map(|c| c.powf(-1.0 / p)))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            let mut d = vec![vec![0.0; n as usize]; n as usize];
            for (&(a, b), &v) in pairs.iter().zip(&dist) {
                d[a as usize][b as usize] = v;
                d[b as usize][a as usize] = v;
            }
            for x in 0..n as usize {
                for y in 0..n as usize {
                    for z in 0..n as usize {
                        if x != y && y != z && x != z {
                            ensure(d[x][z] <= (d[x][y] + d[y][z]) * (1.0 + SOLVER_SLACK), || {
                                format!("triangle p={p} ({x},{y},{z})")
                            })?;
                            triples += 1;
                        }
                    }
                }
            }
        }
    }

    let g3 = build_cell_graph(3, CellAdjacency::Full).map_err(err)?;
    let pg3 = build_point_graph(3, PointKind::Modified).map_err(err)?;
    for k in 0..RANDOM_INSTANCES {
        let p = random_exponent(&mut r);
        let seed = r.gen();
        for (graph, f, perms) in [
            (g3.graph(), random_function(g3.graph(), seed), &g3 as &dyn SymmetricGraph),
            (pg3.graph(), random_function(pg3.graph(), seed), &pg3 as &dyn SymmetricGraph),
        ] {
            let e = p_energy(graph, &f, p).map_err(err)?;
            for t in SymmetryElement::ALL {
                let moved = p_energy(graph, &perms.pull(&f, t)?, p).map_err(err)?;
                ensure((moved - e).abs() <= IDENTITY_REL * e, || format!("symmetry instance {k} {t:?}"))?;
            }
        }
    }

    let boundary = g2.subset("boundary").map_err(err)?;
    let data_sets: Vec<(Vec<f64>, f64)> = (0..RANDOM_INSTANCES)
        .map(|_| (random_values(&mut r, boundary.len()), random_exponent(&mut r)))
        .collect();
    data_sets.par_iter().enumerate().try_for_each(|(k, (data, p))| {
        let spec = ConstraintSpec {
            dirichlet: boundary.iter().copied().zip(data.iter().copied()).collect(),
            ..ConstraintSpec::default()
        };
        let report = solve_dirichlet(g2.graph(), &spec, *p, &o).map_err(err)?;
        let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = SOLVER_SLACK * (hi - lo);
        ensure(
            report.minimizer.values.iter().all(|&x| x >= lo - slack && x <= hi + slack),
            || format!("range instance {k}"),
        )
    })?;
    Ok(format!(
        "{RANDOM_INSTANCES} instances each for Markov, monotonicity, symmetry, range; {triples} ordered triples"
    ))
}

/// Object-safe access to `pullback_symmetry` for mixed graph kinds.
trait SymmetricGraph {
    fn pull(&self, f: &GraphFunction, t: SymmetryElement) -> Result<GraphFunction, String>;
}

impl<G: CarpetGraph> SymmetricGraph for G {
    fn pull(&self, f: &GraphFunction, t: SymmetryElement) -> Result<GraphFunction, String> {
        pullback_symmetry(self, f, t).map_err(err)
    }
}

/// Scaling tables shared by criteria 4 and 9.
fn tables() -> &'static Result<Vec<ScalingTable>, String> {
    static TABLES: OnceLock<Result<Vec<ScalingTable>, String>> = OnceLock::new();
    TABLES.get_or_init(|| {
        [(2.0, 6), (2.5, 5), (3.0, 5), (1.2, 5)]
            .par_iter()
            .map(|&(p, n_max)| estimate_rho(p, ScalingFamily::Lr, 1, n_max, &opts()).map_err(err))
            .collect()
    })
}

fn table(p: f64) -> Result<&'static ScalingTable, String> {
    let tables = tables().as_ref().map_err(Clone::clone)?;
    let t = tables.iter().find(|t| t.p == p).expect("tabulated exponent");
    if let Some(row) = t.rows.iter().find(|r| r.value.is_none()) {
        return Err(format!("p={p} n={} failed: {}", row.n, row.error.as_deref().unwrap_or("")));
    }
    Ok(t)
}

fn estimates(t: &ScalingTable) -> Result<(f64, f64, f64), String> {
    let rho = t.rho_hat_ratio.ok_or("no ratio estimate")?;
    let beta = t.beta_hat_ratio.ok_or("no ratio estimate")?;
    let beta_fit = t.beta_hat_fit.ok_or("no fit estimate")?;
    Ok((rho, beta, (beta - beta_fit).abs()))
}

fn criterion_4() -> Verdict {
    let (rho2, beta2, spread2) = estimates(table(2.0)?)?;
    let (_, beta25, spread25) = estimates(table(2.5)?)?;
    let (rho3, beta3, spread3) = estimates(table(3.0)?)?;
    let (rho_low, _, _) = estimates(table(1.2)?)?;
    ensure(rho2 >= RHO2_FLOOR, || format!("rho_2 = {rho2}"))?;
    ensure(rho3 >= RHO3_FLOOR, || format!("rho_3 = {rho3}"))?;
    ensure(rho_low <= RHO_LOW_CEILING, || format!("rho_1.2 = {rho_low}"))?;
    let ratios = [(2.0, beta2, spread2), (2.5, beta25, spread25), (3.0, beta3, spread3)];
    for w in ratios.windows(2) {
        let ((p, b, s), (q, c, t)) = (w[0], w[1]);
        ensure(c / q <= b / p + s / p + t / q, || format!("beta/p rises from p={p} ({}) to p={q} ({})", b / p, c / q))?;
    }
    Ok(format!(
        "rho_2={rho2:.4} rho_3={rho3:.4} rho_1.2={rho_low:.4} beta/p={:.4},{:.4},{:.4}",
        beta2 / 2.0,
        beta25 / 2.5,
        beta3 / 3.0
    ))
}

fn criterion_5() -> Verdict {
    let jobs: Vec<(usize, f64)> = [2.0, 3.0].iter().flat_map(|&p| [(4, p), (5, p)]).collect();
    let gaps: Vec<f64> = jobs
        .par_iter()
        .map(|&(n, p)| strictness_gap(n, p, &opts()).map(|r| r.gap).map_err(err))
        .collect::<Result<_, _>>()?;
    for (&(n, p), &gap) in jobs.iter().zip(&gaps) {
        ensure(gap > 0.0, || format!("gap n={n} p={p} is {gap}"))?;
    }
    let drift = (gaps[1] / gaps[0] - 1.0).abs();
    ensure(drift <= GAP_STABILITY, || format!("p=2 gap drifts by {drift:.3}"))?;
    Ok(format!(
        "gaps p=2: {:.4},{:.4} (drift {drift:.3}); p=3: {:.4},{:.4}",
        gaps[0], gaps[1], gaps[2], gaps[3]
    ))
}

fn criterion_6() -> Verdict {
    let jobs: Vec<(usize, f64)> = (1..=3).flat_map(|n| [(n, 2.0), (n, 3.0)]).collect();
    let worst = jobs
        .par_iter()
        .map(|&(n, p)| -> Result<f64, String> {
            let o = opts();
            let lr = conductance_lr(n, p, GraphFamily::Cell, &o).map_err(err)?;
            let chain: Vec<f64> = (2..=6)
                .map(|m| conductance_chain(n, m, p, &o))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            ensure(chain[1] <= lr * (1.0 + SOLVER_SLACK), || format!("n={n} p={p}: C(n,3) {} > {lr}", chain[1]))?;
            for (k, w) in chain.windows(2).enumerate() {
                ensure(w[1] <= w[0] * (1.0 + SOLVER_SLACK), || format!("n={n} p={p}: M={} to {} rises", k + 2, k + 3))?;
            }
            let half = half_chain_minimum(n, 4, p, &o).map_err(err)?;
            ensure(half >= 0.5, || format!("n={n} p={p}: half-chain minimum {half}"))?;
            Ok(half)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(format!("chain bounds hold, smallest half-chain minimum {worst:.4}"))
}

fn criterion_7() -> Verdict {
    let t = relation_table(&[2, 3, 4], 2.0, &opts()).map_err(err)?;
    let spreads = [&t.lambda_over_sigma, &t.lambda_star_over_lambda, &t.lambda_times_conductance]
        .map(|s| s.as_ref().map_or(f64::INFINITY, |s| s.spread));
    ensure(spreads.iter().all(|&s| s <= SPREAD_LIMIT), || format!("spreads {spreads:?}"))?;
    Ok(format!(
        "spreads {:.3}, {:.3}, {:.3} (threshold {SPREAD_LIMIT})",
        spreads[0], spreads[1], spreads[2]
    ))
}

fn criterion_8() -> Verdict {
    let pg = build_point_graph(2, PointKind::Modified).map_err(err)?;
    let graph = pg.graph();
    let mut worst: f64 = 0.0;
    for (seed, p) in [(1, 1.5), (2, 2.0), (3, 3.0)] {
        let f = random_function(graph, seed);
        let grad = p_energy_gradient(graph, &f, p).map_err(err)?;
        for v in 0..graph.vertex_count() {
            let shifted = |delta: f64| {
                let mut values = f.values.clone();
                values[v] += delta;
                p_energy(graph, &GraphFunction::new(graph, values).unwrap(), p).unwrap()
            };
            let fd = (shifted(FD_STEP) - shifted(-FD_STEP)) / (2.0 * FD_STEP);
            let dev = (fd - grad.values[v]).abs() / grad.values[v].abs().max(1.0);
            ensure(dev <= FD_REL, || format!("gradient p={p} v={v}: {fd} vs {}", grad.values[v]))?;
            worst = worst.max(dev);
        }
    }

    let g = build_cell_graph(3, CellAdjacency::Full).map_err(err)?;
    let spec = ConstraintSpec::two_sets(g.subset("left").map_err(err)?, g.subset("right").map_err(err)?).map_err(err)?;
    let mut gap: f64 = 0.0;
    for p in [1.5, 2.0, 3.0] {
        let run = |seed| {
            let o = SolverOptions {
                init: Init::Random,
                seed,
                ..opts()
            };
            solve(g.graph(), &spec, p, &o, None).map_err(err)
        };
        let (a, b) = (run(1)?, run(2)?);
        let d = a.minimizer.max_abs_diff(&b.minimizer);
        ensure(d <= UNIQUENESS, || format!("p={p}: random starts differ by {d}"))?;
        gap = gap.max(d);
        let again = run(1)?;
        let bytes = |r: &carpet_core::solver::SolveReport| -> Vec<u8> {
            r.minimizer.values.iter().chain([&r.energy, &r.kkt_residual]).flat_map(|x| x.to_le_bytes()).collect()
        };
        ensure(bytes(&a) == bytes(&again) && a.iterations == again.iterations, || format!("p={p}: rerun differs"))?;
    }
    Ok(format!("gradient dev {worst:.1e}, start dependence {gap:.1e}, reruns identical"))
}

fn criterion_9() -> Verdict {
    let (_, beta2, _) = estimates(table(2.0)?)?;
    let g = build_point_graph(5, PointKind::Simple).map_err(err)?;
    let report = conductance_report(g.graph(), g.subset("left").map_err(err)?, g.subset("right").map_err(err)?, 2.0, &opts())
        .map_err(err)?;
    let betas: Vec<f64> = (0..=24).map(|k| 1.5 + 0.05 * k as f64).collect();
    let sweep = besov_sweep(&g, &report.minimizer, 2.0, &[3, 4], &betas).map_err(err)?;
    let (Some(lo), Some(hi)) = sweep.bracket else {
        return Err(format!("no bracket: {:?}", sweep.bracket));
    };
    for end in [lo, hi] {
        ensure((end - beta2).abs() <= BESOV_WINDOW * beta2, || format!("bracket end {end} vs beta_2 {beta2}"))?;
    }
    Ok(format!(
        "bracket [{lo:.2}, {hi:.2}], estimate {:.4}, beta_2 {beta2:.4}",
        sweep.critical_estimate
    ))
}

fn main() -> ExitCode {
    let criteria: [fn() -> Verdict; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let mut failed = 0;
    for (k, run) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let verdict = run();
        let secs = clock.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {}: PASS {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
