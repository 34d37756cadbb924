//! Quadratic case against dense linear algebra.

mod common;

use std::collections::BTreeMap;

use carpet_core::carpet::Word;
use carpet_core::graphs::{build_cell_graph, build_chain_graph, build_point_graph, CarpetGraph, CellAdjacency, PointKind};
use carpet_core::poincare::{lambda, lambda_star, reciprocal_check, sigma, sigma_graph};
use carpet_core::scaling::{
    conductance_chain, conductance_lr, corner_cell_conductance, neighborhood_conductance, point_resistance, standard_point_pair,
    GraphFamily,
};
use carpet_core::solver::{harmonic_oracle, solve_dirichlet, ConstraintSpec, Method, SolverOptions};
use common::*;

const REL: f64 = 1e-6;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn left_right_conductance_on_cells() {
    for n in 1..=3 {
        let g = build_cell_graph(n, CellAdjacency::Full).unwrap();
        let oracle = dense_conductance(g.graph(), g.subset("left").unwrap(), g.subset("right").unwrap());
        let value = conductance_lr(n, 2.0, GraphFamily::Cell, &opts()).unwrap();
        assert!(rel(value, oracle) < REL, "n={n}: {value} vs {oracle}");
    }
}

#[test]
fn left_right_conductance_on_points() {
    for n in 1..=3 {
        let g = build_point_graph(n, PointKind::Modified).unwrap();
        let oracle = dense_conductance(g.graph(), g.subset("left").unwrap(), g.subset("right").unwrap());
        let value = conductance_lr(n, 2.0, GraphFamily::Point, &opts()).unwrap();
        assert!(rel(value, oracle) < REL, "n={n}: {value} vs {oracle}");
    }
}

#[test]
fn first_level_conductance_is_two() {
    // Two disjoint left-to-right paths of three cells, and cross links
    // between the left and right columns only through the middle column.
    let oracle = {
        let g = build_cell_graph(1, CellAdjacency::Full).unwrap();
        dense_conductance(g.graph(), g.subset("left").unwrap(), g.subset("right").unwrap())
    };
    assert!(rel(oracle, 2.0) < 1e-12);
}

#[test]
fn chain_conductance() {
    for n in 1..=2 {
        for copies in 2..=4 {
            let g = build_chain_graph(n, copies).unwrap();
            let oracle = dense_conductance(g.graph(), g.left(), g.right());
            let value = conductance_chain(n, copies, 2.0, &opts()).unwrap();
            assert!(rel(value, oracle) < REL, "n={n} M={copies}: {value} vs {oracle}");
        }
    }
}

#[test]
fn point_pair_resistance() {
    let (x, y) = standard_point_pair(0).unwrap();
    for n in 1..=3 {
        let g = build_point_graph(n, PointKind::Modified).unwrap();
        let a = g.index_of(&x).unwrap();
        let b = g.index_of(&y).unwrap();
        let oracle = 1.0 / dense_conductance(g.graph(), &[a], &[b]);
        let value = point_resistance(n, &x, &y, 2.0, &opts()).unwrap();
        assert!(rel(value, oracle) < REL, "n={n}: {value} vs {oracle}");
    }
}

#[test]
fn corner_cells() {
    for n in 1..=3 {
        let g = build_cell_graph(n, CellAdjacency::Full).unwrap();
        let cell = |s: u8| g.index_of(&Word::new(&vec![s; n]).unwrap()).unwrap();
        for (i, j) in [(1u8, 3u8), (1, 5), (2, 6)] {
            let oracle = dense_conductance(g.graph(), &[cell(i)], &[cell(j)]);
            let value = corner_cell_conductance(n, i, j, 2.0, &opts()).unwrap();
            assert!(rel(value, oracle) < REL, "n={n} ({i},{j}): {value} vs {oracle}");
        }
    }
}

/// The neighbourhood solve runs on a reduced graph; the reference uses the
/// whole of `G_{1+n}` with every block outside the 1-neighbourhood as sink.
#[test]
fn neighborhood_reduction() {
    for n in 1..=2 {
        let g = build_cell_graph(1 + n, CellAdjacency::Full).unwrap();
        for w in [Word::new(&[1]).unwrap(), Word::new(&[2]).unwrap()] {
            let (wx, wy) = w.grid_position();
            let mut source = Vec::new();
            let mut sink = Vec::new();
            for (v, word) in g.words().iter().enumerate() {
                let (ux, uy) = word.prefix(1).grid_position();
                let d = (ux as i64 - wx as i64).abs().max((uy as i64 - wy as i64).abs());
                if d == 0 {
                    source.push(v as u32);
                } else if d >= 2 {
                    sink.push(v as u32);
                }
            }
            let oracle = dense_conductance(g.graph(), &source, &sink);
            let value = neighborhood_conductance(&w, n, 2.0, &opts()).unwrap();
            assert!(rel(value, oracle) < REL, "w={w} n={n}: {value} vs {oracle}");
        }
    }
}

#[test]
fn lambda_star_matches_kkt() {
    for n in 2..=3 {
        let g = build_cell_graph(n, CellAdjacency::Full).unwrap();
        let all: Vec<u32> = (0..g.graph().vertex_count() as u32).collect();
        let (_, e) = dense_mean_constrained(g.graph(), g.subset("boundary").unwrap(), &[(all, 1.0)]);
        let result = lambda_star(n, 2.0, &opts()).unwrap();
        assert!(result.converged);
        assert!(rel(result.value, 1.0 / e) < REL, "n={n}: {} vs {}", result.value, 1.0 / e);
        assert!((reciprocal_check(&result, &g).unwrap() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn sigma_matches_kkt() {
    for n in 1..=3 {
        let g = sigma_graph(n).unwrap();
        let block = 1u32 << (3 * n);
        let means = [((0..block).collect(), 1.0), ((block..2 * block).collect(), 0.0)];
        let (_, e) = dense_mean_constrained(g.graph(), &[], &means);
        let result = sigma(n, 2.0, &opts()).unwrap();
        assert!(rel(result.value, 1.0 / e) < REL, "n={n}: {} vs {}", result.value, 1.0 / e);
        let values = &result.certificate.values;
        let mean = |r: std::ops::Range<u32>| r.clone().map(|v| values[v as usize]).sum::<f64>() / r.len() as f64;
        assert!((mean(0..block) - 1.0).abs() < 1e-10);
        assert!(mean(block..2 * block).abs() < 1e-10);
        assert!((reciprocal_check(&result, &g).unwrap() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn lambda_matches_spectral_gap() {
    for n in 1..=3 {
        let g = build_cell_graph(n, CellAdjacency::Full).unwrap();
        let oracle = dense_lambda(g.graph(), 8f64.powi(-(n as i32)));
        let result = lambda(n, 2.0, &opts()).unwrap();
        assert!(!result.is_lower_bound);
        assert!(rel(result.value, oracle) < REL, "n={n}: {} vs {oracle}", result.value);
    }
}

#[test]
fn larger_levels_match_iterative_reference() {
    for n in 4..=5 {
        let g = build_cell_graph(n, CellAdjacency::Full).unwrap();
        let fixed: BTreeMap<u32, f64> = g
            .subset("left")
            .unwrap()
            .iter()
            .map(|&v| (v, 1.0))
            .chain(g.subset("right").unwrap().iter().map(|&v| (v, 0.0)))
            .collect();
        let (_, reference) = harmonic_oracle(g.graph(), &fixed, 1e-14).unwrap();
        let value = conductance_lr(n, 2.0, GraphFamily::Cell, &opts()).unwrap();
        assert!(rel(value, reference) < 1e-8, "n={n}: {value} vs {reference}");
    }
}

#[test]
fn every_method_agrees_with_the_dense_solve() {
    let g = build_cell_graph(2, CellAdjacency::Full).unwrap();
    let mut r = rng(7);
    let boundary = g.subset("boundary").unwrap();
    let data = random_values(&mut r, boundary.len());
    let fixed: BTreeMap<u32, f64> = boundary.iter().copied().zip(data).collect();
    let (reference, e) = dense_dirichlet(g.graph(), &fixed);
    for method in [Method::Newton, Method::GaussSeidel, Method::ProjectedGradient] {
        let o = SolverOptions {
            method,
            ..SolverOptions::default()
        };
        let spec = ConstraintSpec {
            dirichlet: fixed.clone(),
            ..ConstraintSpec::default()
        };
        let report = solve_dirichlet(g.graph(), &spec, 2.0, &o).unwrap();
        assert!(report.converged, "{method:?}: kkt {} after {} iterations", report.kkt_residual, report.iterations);
        assert!(rel(report.energy, e) < REL, "{method:?}: {} vs {e}", report.energy);
        let gap = report
            .minimizer
            .values
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-5, "{method:?}: max deviation {gap}");
    }
}
