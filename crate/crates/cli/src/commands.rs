use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use carpet_core::energy::p_energy;
use carpet_core::graphs::{CarpetGraph, CellAdjacency, CellGraph, ChainGraph, Graph, PointGraph, PointKind, DEFAULT_VERTEX_BUDGET};
use carpet_core::measures::{besov_sweep, chain_rule_check, energy_measure, ScalarMap};
use carpet_core::poincare::{poincare, relation_table};
use carpet_core::scaling::{build_hn, strictness_gap, ScalingFamily, ScalingRow, ScalingTable};
use carpet_core::solver::{solve_dirichlet, ConstraintSpec, SolverOptions};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::cache::{Cache, DEFAULT_CACHE_DIR};
use crate::error::{CliError, CliResult};
use crate::functions::Evaluated;
use crate::record::{instance_hash, versions, RunRecord};

/// Result of a computation, and whether every solve behind it converged.
pub struct Computed {
    pub result: Value,
    pub complete: bool,
}

impl Computed {
    fn complete(result: impl Serialize) -> CliResult<Self> {
        Ok(Computed {
            result: serde_json::to_value(result)?,
            complete: true,
        })
    }
}

pub struct Context {
    cache: Option<Cache>,
    timings: bool,
}

impl Context {
    pub fn new(cli: &Cli) -> Self {
        let dir = cli.cache_dir.clone().unwrap_or_else(|| DEFAULT_CACHE_DIR.into());
        Context {
            cache: (!cli.no_cache).then(|| Cache::new(dir)),
            timings: cli.timings,
        }
    }

    fn wall_ms(&self, clock: Instant) -> u64 {
        if self.timings {
            clock.elapsed().as_millis() as u64
        } else {
            0
        }
    }

    /// Runs `compute` unless the cache holds the instance. Only complete
    /// results are cached.
    fn run(
        &self,
        command: String,
        opts: &SolverOptions,
        compute: impl FnOnce() -> CliResult<Computed>,
    ) -> CliResult<(RunRecord, bool)> {
        let clock = Instant::now();
        let hash = instance_hash(&json!({ "command": command, "options": opts }));
        if let Some(mut hit) = self.cache.as_ref().and_then(|c| c.lookup(&hash)) {
            if hit.command == command {
                hit.wall_ms = self.wall_ms(clock);
                return Ok((hit, true));
            }
        }
        let computed = compute()?;
        let mut record = RunRecord {
            command,
            instance_hash: hash,
            result: computed.result,
            versions: versions(),
            seed: opts.seed,
            wall_ms: 0,
        };
        if computed.complete {
            if let Some(cache) = &self.cache {
                cache.store(&record)?;
            }
        }
        record.wall_ms = self.wall_ms(clock);
        Ok((record, computed.complete))
    }
}

fn emit_json(value: &impl Serialize, out: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    if let Some(path) = out {
        fs::write(path, &text)?;
    }
    std::io::stdout().lock().write_all(text.as_bytes())?;
    Ok(())
}

fn finish(record: &RunRecord, complete: bool, out: Option<&Path>) -> CliResult<()> {
    emit_json(record, out)?;
    if complete {
        Ok(())
    } else {
        Err(CliError::Incomplete)
    }
}

pub fn dispatch(cli: Cli) -> CliResult<()> {
    let ctx = Context::new(&cli);
    match cli.command {
        Command::Graph(GraphCommand::Build(a)) => graph_build(&a),
        Command::Solve(SolveCommand::Dirichlet(a)) => solve(&ctx, &a),
        Command::Conductance(a) => conductance(&ctx, &a),
        Command::Scaling(ScalingCommand::Rho(a)) => scaling_rho(&ctx, &a),
        Command::Poincare(a) => poincare_cmd(&ctx, &a),
        Command::Measure(MeasureCommand::Energy(a)) => measure_energy(&ctx, &a),
        Command::Measure(MeasureCommand::Besov(a)) => measure_besov(&ctx, &a),
        Command::Measure(MeasureCommand::Chainrule(a)) => measure_chainrule(&ctx, &a),
        Command::Experiment(ExperimentCommand::Strictness(a)) => strictness(&ctx, &a),
        Command::Experiment(ExperimentCommand::Hn(a)) => hn(&ctx, &a),
        Command::Cache(CacheCommand::Gc(a)) => {
            let cache = ctx.cache.unwrap_or_else(|| Cache::new(cli.cache_dir.unwrap_or_else(|| DEFAULT_CACHE_DIR.into())));
            emit_json(&cache.gc(a.all)?, None)
        }
    }
}

fn kind_name(kind: GraphKind) -> &'static str {
    match kind {
        GraphKind::Cell => "cell",
        GraphKind::CellSegment => "cell-segment",
        GraphKind::Point => "point",
        GraphKind::PointSimple => "point-simple",
        GraphKind::Chain => "chain",
    }
}

enum Built {
    Cell(CellGraph),
    Point(PointGraph),
}

impl Built {
    fn new(kind: GraphKind, n: usize, budget: u64) -> CliResult<Built> {
        Ok(match kind {
            GraphKind::Cell => Built::Cell(CellGraph::build(n, CellAdjacency::Full, budget)?),
            GraphKind::CellSegment => Built::Cell(CellGraph::build(n, CellAdjacency::Segment, budget)?),
            GraphKind::Point => Built::Point(PointGraph::build(n, PointKind::Modified, budget)?),
            GraphKind::PointSimple => Built::Point(PointGraph::build(n, PointKind::Simple, budget)?),
            GraphKind::Chain => return Err(CliError::Usage("chains are built by `graph build` only".into())),
        })
    }

    fn graph(&self) -> &Graph {
        match self {
            Built::Cell(g) => g.graph(),
            Built::Point(g) => g.graph(),
        }
    }

    fn subset(&self, name: &str) -> CliResult<&[u32]> {
        Ok(match self {
            Built::Cell(g) => g.subset(name)?,
            Built::Point(g) => g.subset(name)?,
        })
    }
}

fn graph_build(a: &GraphBuildArgs) -> CliResult<()> {
    let (document, vertices, edges) = match a.kind {
        GraphKind::Chain => {
            let copies = a.copies.ok_or_else(|| CliError::Usage("--M is required for chains".into()))?;
            let g = ChainGraph::build(a.n, copies, a.budget)?;
            let g = g.cells();
            (serde_json::to_value(g.to_document())?, g.graph().vertex_count(), g.graph().edge_count())
        }
        kind => match Built::new(kind, a.n, a.budget)? {
            Built::Cell(g) => (serde_json::to_value(g.to_document())?, g.graph().vertex_count(), g.graph().edge_count()),
            Built::Point(g) => (serde_json::to_value(g.to_document())?, g.graph().vertex_count(), g.graph().edge_count()),
        },
    };
    if let Some(path) = &a.out {
        fs::write(path, serde_json::to_string(&document)?)?;
    }
    emit_json(
        &json!({
            "kind": kind_name(a.kind),
            "n": a.n,
            "copies": a.copies,
            "vertices": vertices,
            "edges": edges,
        }),
        None,
    )
}

fn solve(ctx: &Context, a: &DirichletArgs) -> CliResult<()> {
    let opts = a.solver.options();
    let fixed_name = match a.fixed {
        FixedSet::Lr => "lr",
        FixedSet::Boundary => "boundary",
    };
    let command = format!(
        "solve dirichlet --kind {} --n {} --p {} --fixed {fixed_name} --f {} {}",
        kind_name(a.kind),
        a.n,
        a.p,
        a.function,
        a.solver.canonical()
    );
    let (record, complete) = ctx.run(command, &opts, || {
        let g = Built::new(a.kind, a.n, DEFAULT_VERTEX_BUDGET)?;
        let data: Evaluated = match &g {
            Built::Cell(c) => a.function.on_cells(c, a.p, &opts)?,
            Built::Point(pg) => a.function.on_points(pg, a.p, &opts)?,
        };
        let mut fixed: Vec<u32> = match a.fixed {
            FixedSet::Lr => [g.subset("left")?, g.subset("right")?].concat(),
            FixedSet::Boundary => g.subset("boundary")?.to_vec(),
        };
        fixed.sort_unstable();
        fixed.dedup();
        let spec = ConstraintSpec {
            dirichlet: fixed.iter().map(|&v| (v, data.function.values[v as usize])).collect(),
            ..ConstraintSpec::default()
        };
        let report = solve_dirichlet(g.graph(), &spec, a.p, &opts)?;
        Ok(Computed {
            complete: report.converged && data.converged,
            result: json!({
                "energy": report.energy,
                "iterations": report.iterations,
                "kkt_residual": report.kkt_residual,
                "kkt_tolerance": report.kkt_tolerance,
                "converged": report.converged,
                "data_converged": data.converged,
                "minimizer": report.minimizer.values,
            }),
        })
    })?;
    finish(&record, complete, a.out.as_deref())
}

fn parse_family(family: &str, copies: Option<usize>, depth: Option<usize>) -> CliResult<ScalingFamily> {
    let name = match (family, copies, depth) {
        ("chain", Some(m), _) => format!("chain-{m}"),
        ("chain", None, _) => return Err(CliError::Usage("--M is required for the chain family".into())),
        ("neighborhood", _, Some(m)) => format!("neighborhood-{m}"),
        ("neighborhood", _, None) => return Err(CliError::Usage("--m is required for the neighborhood family".into())),
        (other, _, _) => other.to_string(),
    };
    name.parse().map_err(|e: carpet_core::CarpetError| CliError::Usage(e.to_string()))
}

fn conductance_command(family: ScalingFamily, n: usize, p: f64, solver: &SolverArgs) -> String {
    format!("conductance --family {family} --n {n} --p {p} {}", solver.canonical())
}

/// One conductance value, shared between `conductance` and the scaling sweep.
fn conductance_record(ctx: &Context, family: ScalingFamily, n: usize, p: f64, solver: &SolverArgs) -> CliResult<RunRecord> {
    let opts = solver.options();
    let (record, _) = ctx.run(conductance_command(family, n, p, solver), &opts, || {
        Computed::complete(json!({
            "family": family,
            "n": n,
            "p": p,
            "value": family.value(n, p, &opts)?,
        }))
    })?;
    Ok(record)
}

fn conductance(ctx: &Context, a: &ConductanceArgs) -> CliResult<()> {
    let family = parse_family(&a.family, a.copies, a.m)?;
    let record = conductance_record(ctx, family, a.n, a.p, &a.solver)?;
    finish(&record, true, a.out.as_deref())
}

#[derive(Serialize)]
struct CsvRow {
    family: String,
    p: f64,
    n: usize,
    value: Option<f64>,
    ratio: Option<f64>,
    rho_hat_ratio: Option<f64>,
    rho_hat_fit: Option<f64>,
    beta_hat_ratio: Option<f64>,
    beta_hat_fit: Option<f64>,
    rho_at_most_one: Option<bool>,
    tol_kkt: f64,
    method: String,
    error: Option<String>,
    wall_ms: u64,
}

fn rho_flag(table: &ScalingTable, tol: f64) -> Option<bool> {
    table.rho_hat_ratio.map(|r| r <= 1.0 + tol)
}

fn csv_rows(tables: &[ScalingTable], rho_tol: f64) -> Vec<CsvRow> {
    tables
        .iter()
        .flat_map(|t| {
            t.rows.iter().map(move |r| CsvRow {
                family: t.family.to_string(),
                p: t.p,
                n: r.n,
                value: r.value,
                ratio: t.ratios.iter().find(|(n, _)| *n == r.n).map(|x| x.1),
                rho_hat_ratio: t.rho_hat_ratio,
                rho_hat_fit: t.rho_hat_fit,
                beta_hat_ratio: t.beta_hat_ratio,
                beta_hat_fit: t.beta_hat_fit,
                rho_at_most_one: rho_flag(t, rho_tol),
                tol_kkt: t.options.tol_kkt,
                method: serde_json::to_value(t.options.method)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                error: r.error.clone(),
                wall_ms: r.wall_ms,
            })
        })
        .collect()
}

fn write_csv(rows: &[CsvRow], sink: impl Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(sink);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn scaling_rho(ctx: &Context, a: &RhoArgs) -> CliResult<()> {
    let family = parse_family(&a.family, a.copies, a.m)?;
    if a.n_min == 0 || a.n_max < a.n_min + 2 {
        return Err(CliError::Usage("need --n-min >= 1 and --n-max >= --n-min + 2".into()));
    }
    let opts = a.solver.options();
    let jobs: Vec<(f64, usize)> = a
        .p
        .iter()
        .flat_map(|&p| (a.n_min..=a.n_max).map(move |n| (p, n)))
        .collect();
    let rows: Vec<ScalingRow> = jobs
        .par_iter()
        .map(|&(p, n)| {
            let clock = Instant::now();
            let outcome = conductance_record(ctx, family, n, p, &a.solver);
            let wall_ms = ctx.wall_ms(clock);
            match outcome {
                Ok(record) => ScalingRow {
                    n,
                    value: record.result["value"].as_f64(),
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
    let per_p = a.n_max - a.n_min + 1;
    let tables: Vec<ScalingTable> = a
        .p
        .iter()
        .zip(rows.chunks(per_p))
        .map(|(&p, chunk)| ScalingTable::from_rows(p, family, a.n_min, a.n_max, chunk.to_vec(), &opts))
        .collect();
    let csv = csv_rows(&tables, a.rho_tol);
    if let Some(path) = &a.out {
        write_csv(&csv, fs::File::create(path)?)?;
    }
    let ps: Vec<String> = a.p.iter().map(f64::to_string).collect();
    let command = format!(
        "scaling rho --p {} --family {family} --n-min {} --n-max {} --rho-tol {} {}",
        ps.join(","),
        a.n_min,
        a.n_max,
        a.rho_tol,
        a.solver.canonical()
    );
    let regimes: Vec<Value> = tables
        .iter()
        .map(|t| json!({ "p": t.p, "rho_at_most_one": rho_flag(t, a.rho_tol) }))
        .collect();
    let result = json!({ "tables": tables, "rho_tol": a.rho_tol, "regimes": regimes });
    let record = RunRecord {
        instance_hash: instance_hash(&json!({ "command": command, "options": opts })),
        command,
        result,
        versions: versions(),
        seed: opts.seed,
        wall_ms: 0,
    };
    match a.format {
        Format::Json => emit_json(&record, None)?,
        Format::Csv => write_csv(&csv, std::io::stdout().lock())?,
    }
    if tables.iter().all(ScalingTable::all_failed) {
        return Err(CliError::AllRowsFailed);
    }
    Ok(())
}

fn poincare_cmd(ctx: &Context, a: &PoincareArgs) -> CliResult<()> {
    let opts = a.solver.options();
    let solver = a.solver.canonical();
    let (record, complete) = match a.kind.single() {
        Some(kind) => {
            let n = a.n.ok_or_else(|| CliError::Usage("--n is required".into()))?;
            let name = clap::ValueEnum::to_possible_value(&a.kind).expect("no skipped variants");
            let command = format!("poincare --kind {} --n {n} --p {} {solver}", name.get_name(), a.p);
            ctx.run(command, &opts, || {
                let result = poincare(kind, n, a.p, &opts)?;
                Ok(Computed {
                    complete: result.converged,
                    result: serde_json::to_value(&result)?,
                })
            })?
        }
        None => {
            let n_min = a.n_min.or(a.n).unwrap_or(2);
            let n_max = a.n_max.or(a.n).unwrap_or(n_min);
            if n_max < n_min {
                return Err(CliError::Usage("--n-max must be at least --n-min".into()));
            }
            let command = format!("poincare --kind relations --n-min {n_min} --n-max {n_max} --p {} {solver}", a.p);
            let levels: Vec<usize> = (n_min..=n_max).collect();
            ctx.run(command, &opts, || Computed::complete(relation_table(&levels, a.p, &opts)?))?
        }
    };
    finish(&record, complete, a.out.as_deref())
}

fn modified_graph(level: usize) -> CliResult<PointGraph> {
    Ok(PointGraph::build(level, PointKind::Modified, DEFAULT_VERTEX_BUDGET)?)
}

fn measure_energy(ctx: &Context, a: &EnergyArgs) -> CliResult<()> {
    let opts = a.solver.options();
    let command = format!(
        "measure energy --f {} --n {} --m {} --p {} --rho {} {}",
        a.function,
        a.n,
        a.m,
        a.p,
        a.rho,
        a.solver.canonical()
    );
    let (record, complete) = ctx.run(command, &opts, || {
        let g = modified_graph(a.n + a.m)?;
        let f = a.function.on_points(&g, a.p, &opts)?;
        let measure = energy_measure(&g, &f.function, a.n, a.p, a.rho)?;
        Ok(Computed {
            complete: f.converged,
            result: json!({
                "function_energy": p_energy(g.graph(), &f.function, a.p)?,
                "measure": measure,
            }),
        })
    })?;
    finish(&record, complete, a.out.as_deref())
}

fn list(values: &[impl ToString]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn measure_besov(ctx: &Context, a: &BesovArgs) -> CliResult<()> {
    let opts = a.solver.options();
    let scales: Vec<usize> = if a.scales.is_empty() { (1..a.m).collect() } else { a.scales.clone() };
    let command = format!(
        "measure besov --f {} --m {} --p {} --beta {} --scales {} {}",
        a.function,
        a.m,
        a.p,
        list(&a.beta),
        list(&scales),
        a.solver.canonical()
    );
    let (record, complete) = ctx.run(command, &opts, || {
        let g = PointGraph::build(a.m, PointKind::Simple, DEFAULT_VERTEX_BUDGET)?;
        let f = a.function.on_points(&g, a.p, &opts)?;
        let sweep = besov_sweep(&g, &f.function, a.p, &scales, &a.beta)?;
        Ok(Computed {
            complete: f.converged,
            result: serde_json::to_value(sweep)?,
        })
    })?;
    finish(&record, complete, a.out.as_deref())
}

fn measure_chainrule(ctx: &Context, a: &ChainRuleArgs) -> CliResult<()> {
    let opts = a.solver.options();
    let map: ScalarMap = a.map.parse().map_err(|e: carpet_core::CarpetError| CliError::Usage(e.to_string()))?;
    let levels: Vec<usize> = if a.levels.is_empty() { (1..a.n).collect() } else { a.levels.clone() };
    let command = format!(
        "measure chainrule --f {} --n {} --levels {} --map {} --p {} {}",
        a.function,
        a.n,
        list(&levels),
        a.map,
        a.p,
        a.solver.canonical()
    );
    let (record, complete) = ctx.run(command, &opts, || {
        let g = modified_graph(a.n)?;
        let f = a.function.on_points(&g, a.p, &opts)?;
        let report = chain_rule_check(&g, &f.function, map, a.p, &levels)?;
        Ok(Computed {
            complete: f.converged,
            result: serde_json::to_value(report)?,
        })
    })?;
    finish(&record, complete, a.out.as_deref())
}

fn strictness(ctx: &Context, a: &StrictnessArgs) -> CliResult<()> {
    let opts = a.solver.options();
    let command = format!("experiment strictness --n {} --p {} {}", a.n, a.p, a.solver.canonical());
    let (record, complete) = ctx.run(command, &opts, || Computed::complete(strictness_gap(a.n, a.p, &opts)?))?;
    finish(&record, complete, a.out.as_deref())
}

fn hn(ctx: &Context, a: &HnArgs) -> CliResult<()> {
    let opts = a.solver.options();
    let command = format!("experiment hn --n {} --m {} --p {} {}", a.n, a.m, a.p, a.solver.canonical());
    let (record, complete) = ctx.run(command, &opts, || Computed::complete(build_hn(a.n, a.m, a.p, &opts)?))?;
    finish(&record, complete, a.out.as_deref())
}
