//! Built-in test functions, named on the command line by `--f`.

use std::fmt;
use std::str::FromStr;

use carpet_core::carpet::cell_box;
use carpet_core::energy::GraphFunction;
use carpet_core::graphs::{CarpetGraph, CellGraph, PointGraph, PointKind};
use carpet_core::scaling::build_hn;
use carpet_core::solver::{conductance_report, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionSpec {
    /// Left/right minimiser (1 on the left side, 0 on the right side).
    HarmonicLr,
    CoordinateX,
    CoordinateY,
    /// Symmetrised left/right minimiser pasted 0 or 2 times.
    H0,
    H2,
    /// Seeded uniform values in `[0, 1)`.
    Random(u64),
}

impl FromStr for FunctionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "harmonic-lr" => Ok(FunctionSpec::HarmonicLr),
            "coordinate-x" => Ok(FunctionSpec::CoordinateX),
            "coordinate-y" => Ok(FunctionSpec::CoordinateY),
            "h0" => Ok(FunctionSpec::H0),
            "h2" => Ok(FunctionSpec::H2),
            _ => s
                .strip_prefix("random:")
                .and_then(|seed| seed.parse().ok())
                .map(FunctionSpec::Random)
                .ok_or_else(|| {
                    format!("unknown function {s:?}; expected harmonic-lr, coordinate-x, coordinate-y, h0, h2 or random:SEED")
                }),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::HarmonicLr => write!(f, "harmonic-lr"),
            FunctionSpec::CoordinateX => write!(f, "coordinate-x"),
            FunctionSpec::CoordinateY => write!(f, "coordinate-y"),
            FunctionSpec::H0 => write!(f, "h0"),
            FunctionSpec::H2 => write!(f, "h2"),
            FunctionSpec::Random(seed) => write!(f, "random:{seed}"),
        }
    }
}

/// A function together with whether the solve behind it (if any) converged.
pub struct Evaluated {
    pub function: GraphFunction,
    pub converged: bool,
}

impl Evaluated {
    fn exact(function: GraphFunction) -> Self {
        Evaluated {
            function,
            converged: true,
        }
    }
}

fn random_values(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen::<f64>()).collect()
}

fn harmonic<G: CarpetGraph>(g: &G, p: f64, opts: &SolverOptions) -> CliResult<Evaluated> {
    let report = conductance_report(g.graph(), g.subset("left")?, g.subset("right")?, p, opts)?;
    Ok(Evaluated {
        function: report.minimizer,
        converged: report.converged,
    })
}

impl FunctionSpec {
    pub fn on_points(self, g: &PointGraph, p: f64, opts: &SolverOptions) -> CliResult<Evaluated> {
        let coordinate = |axis: usize| {
            GraphFunction::from_fn(g.graph(), |v| {
                let (x, y) = g.points()[v].to_f64();
                [x, y][axis] + 0.5
            })
        };
        match self {
            FunctionSpec::HarmonicLr => harmonic(g, p, opts),
            FunctionSpec::CoordinateX => Ok(Evaluated::exact(coordinate(0))),
            FunctionSpec::CoordinateY => Ok(Evaluated::exact(coordinate(1))),
            FunctionSpec::H0 | FunctionSpec::H2 => {
                if g.kind() != PointKind::Modified {
                    return Err(CliError::Usage(format!("{self} lives on the modified point graph")));
                }
                let depth = if self == FunctionSpec::H0 { 0 } else { 2 };
                let h = build_hn(g.level(), depth, p, opts)?;
                Ok(Evaluated::exact(h.function))
            }
            FunctionSpec::Random(seed) => Ok(Evaluated::exact(GraphFunction::new(
                g.graph(),
                random_values(g.graph().vertex_count(), seed),
            )?)),
        }
    }

    /// Cell functions are sampled at cell centres.
    pub fn on_cells(self, g: &CellGraph, p: f64, opts: &SolverOptions) -> CliResult<Evaluated> {
        let coordinate = |axis: usize| {
            GraphFunction::from_fn(g.graph(), |v| {
                let b = cell_box(&g.words()[v]);
                let scale = 4.0 * 3f64.powi(b.denom_level as i32);
                let lo = [b.min_x, b.min_y][axis] as f64;
                (lo + 0.5 * b.side as f64) / scale + 0.5
            })
        };
        match self {
            FunctionSpec::HarmonicLr => harmonic(g, p, opts),
            FunctionSpec::CoordinateX => Ok(Evaluated::exact(coordinate(0))),
            FunctionSpec::CoordinateY => Ok(Evaluated::exact(coordinate(1))),
            FunctionSpec::H0 | FunctionSpec::H2 => Err(CliError::Usage(format!(
                "{self} lives on the modified point graph"
            ))),
            FunctionSpec::Random(seed) => Ok(Evaluated::exact(GraphFunction::new(
                g.graph(),
                random_values(g.graph().vertex_count(), seed),
            )?)),
        }
    }
}
