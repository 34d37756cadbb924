//! Exact combinatorial and self-similarity identities.

mod common;

use carpet_core::carpet::{apply_symmetry, cell_box, cells_intersect, LatticePoint, SymmetryElement, Word};
use carpet_core::energy::{coarsen, p_energy, pullback_cell, pullback_symmetry, GraphFunction};
use carpet_core::graphs::{
    build_cell_graph, build_chain_graph, build_point_graph, CarpetGraph, CellAdjacency, PointGraph, PointKind,
};
use carpet_core::measures::{discrete_measure, energy_measure};
use common::*;

#[test]
fn word_space_sizes() {
    for n in 0..=5 {
        assert_eq!(Word::all(n).unwrap().count() as u64, 8u64.pow(n as u32));
    }
    for n in 1..=4 {
        let g = build_cell_graph(n, CellAdjacency::Full).unwrap();
        assert_eq!(g.graph().vertex_count() as u64, 8u64.pow(n as u32));
    }
}

#[test]
fn simple_point_graph_sizes() {
    for n in 1..=8usize {
        let k = n as u32 - 1;
        let formula = (12 * 8u64.pow(k) + 8 * 3u64.pow(k)) / 5;
        assert_eq!((12 * 8u64.pow(k) + 8 * 3u64.pow(k)) % 5, 0);
        let g = PointGraph::build(n, PointKind::Simple, 10_000_000).unwrap();
        assert_eq!(g.graph().vertex_count() as u64, formula, "n={n}");
    }
}

#[test]
fn small_graph_counts() {
    let g1 = build_cell_graph(1, CellAdjacency::Full).unwrap();
    assert_eq!((g1.graph().vertex_count(), g1.graph().edge_count()), (8, 12));
    let s1 = build_cell_graph(1, CellAdjacency::Segment).unwrap();
    assert_eq!(s1.graph().edge_count(), 8);
    assert_eq!(build_point_graph(2, PointKind::Simple).unwrap().graph().vertex_count(), 24);
    assert_eq!(build_chain_graph(1, 3).unwrap().graph().vertex_count(), 24);
}

#[test]
fn graphs_are_connected() {
    for n in 1..=4 {
        for adj in [CellAdjacency::Full, CellAdjacency::Segment] {
            assert!(build_cell_graph(n, adj).unwrap().graph().is_connected());
        }
        for kind in [PointKind::Modified, PointKind::Simple] {
            assert!(build_point_graph(n, kind).unwrap().graph().is_connected());
        }
    }
    for copies in 2..=5 {
        assert!(build_chain_graph(2, copies).unwrap().graph().is_connected());
    }
}

#[test]
fn full_cell_graphs_have_degree_at_most_seven() {
    for n in 1..=4 {
        assert!(build_cell_graph(n, CellAdjacency::Full).unwrap().graph().max_degree() <= 7);
    }
}

#[test]
fn cell_graph_automorphisms() {
    for n in 1..=3 {
        for adj in [CellAdjacency::Full, CellAdjacency::Segment] {
            let g = build_cell_graph(n, adj).unwrap();
            let idx = |w: &Word| g.index_of(w).unwrap() as usize;
            for t in SymmetryElement::ALL {
                for (&[a, b], &kind) in g.graph().edges().iter().zip(g.edge_kinds()) {
                    let (wa, wb) = (apply_symmetry(t, &g.words()[a as usize]), apply_symmetry(t, &g.words()[b as usize]));
                    assert!(g.graph().has_edge(idx(&wa), idx(&wb)));
                    assert_eq!(cells_intersect(&wa, &wb).unwrap(), kind);
                }
            }
        }
    }
}

#[test]
fn point_graphs_nest() {
    for kind in [PointKind::Modified, PointKind::Simple] {
        for total in 2..=5 {
            let fine = build_point_graph(total, kind).unwrap();
            for m in 1..total {
                let coarse = build_point_graph(m, kind).unwrap();
                for w in Word::all(total - m).unwrap() {
                    for p in coarse.points() {
                        assert!(fine.index_of(&p.apply_word(&w)).is_some(), "{kind:?} w={w} m={m}");
                    }
                }
            }
        }
    }
}

#[test]
fn full_row_chain_is_the_bottom_row_of_the_finer_graph() {
    for n in 1..=2 {
        let chain = build_chain_graph(n, 3).unwrap();
        let g = build_cell_graph(n + 1, CellAdjacency::Full).unwrap();
        let row: Vec<u32> = (0..g.graph().vertex_count() as u32)
            .filter(|&v| g.words()[v as usize].prefix(1).grid_position().1 == 0)
            .collect();
        assert_eq!(row.len(), chain.graph().vertex_count());
        let to_g: Vec<u32> = chain.cells().words().iter().map(|w| g.index_of(w).unwrap()).collect();
        let mut mapped = to_g.clone();
        mapped.sort_unstable();
        assert_eq!(mapped, row);
        let (induced, _) = g.graph().induced("row", &row).unwrap();
        assert_eq!(induced.edge_count(), chain.graph().edge_count());
        for &[a, b] in chain.graph().edges() {
            assert!(g.graph().has_edge(to_g[a as usize] as usize, to_g[b as usize] as usize));
        }
    }
}

fn random_function(g: &PointGraph, seed: u64) -> GraphFunction {
    let mut r = rng(seed);
    GraphFunction::new(g.graph(), random_values(&mut r, g.graph().vertex_count())).unwrap()
}

#[test]
fn raw_energy_decomposes_over_the_eight_copies() {
    for kind in [PointKind::Modified, PointKind::Simple] {
        for n in 1..=3 {
            let coarse = build_point_graph(n, kind).unwrap();
            let fine = build_point_graph(n + 1, kind).unwrap();
            for (seed, p) in [(1, 2.0), (2, 1.5), (3, 3.0)] {
                let f = random_function(&fine, seed);
                let whole = p_energy(fine.graph(), &f, p).unwrap();
                let parts: f64 = (1..=8u8)
                    .map(|i| p_energy(coarse.graph(), &pullback_cell(&fine, &coarse, &f, i).unwrap(), p).unwrap())
                    .sum();
                assert!(rel(parts, whole) < 1e-12, "{kind:?} n={n} p={p}: {parts} vs {whole}");
            }
        }
    }
}

/// `F_w^* f` by successive one-letter pullbacks, first letter first.
fn pullback_word(f: &GraphFunction, w: &Word, top: usize, kind: PointKind) -> GraphFunction {
    let mut current = f.clone();
    for (k, s) in w.symbols().enumerate() {
        let fine = build_point_graph(top - k, kind).unwrap();
        let coarse = build_point_graph(top - k - 1, kind).unwrap();
        current = pullback_cell(&fine, &coarse, &current, s).unwrap();
    }
    current
}

#[test]
fn energy_measure_masses_are_rescaled_copy_energies() {
    let (n, m, p, rho) = (1, 2, 2.5, 1.3);
    let g = build_point_graph(n + m, PointKind::Modified).unwrap();
    let small = build_point_graph(m, PointKind::Modified).unwrap();
    let f = random_function(&g, 11);
    let measure = energy_measure(&g, &f, n, p, rho).unwrap();
    let raw = p_energy(g.graph(), &f, p).unwrap();
    assert!(rel(measure.total, rho.powi((n + m) as i32) * raw) < 1e-12);
    let sum: f64 = measure.entries.iter().map(|e| e.1).sum();
    assert!(rel(sum, measure.total) < 1e-12);
    for w in Word::all(n).unwrap() {
        let local = p_energy(small.graph(), &pullback_word(&f, &w, n + m, PointKind::Modified), p).unwrap();
        let expected = rho.powi((n + m) as i32) * local;
        assert!(rel(measure.mass(&w).unwrap(), expected) < 1e-12, "w={w}");
    }
}

#[test]
fn energy_measure_total_and_aggregation() {
    for (level, p, seed) in [(3, 2.0, 1), (4, 1.5, 2), (5, 3.0, 3)] {
        let g = build_point_graph(level, PointKind::Modified).unwrap();
        let f = random_function(&g, seed);
        let raw = p_energy(g.graph(), &f, p).unwrap();
        for n in 1..level {
            let coarse = energy_measure(&g, &f, n - 1, p, 1.0).unwrap();
            let fine = energy_measure(&g, &f, n, p, 1.0).unwrap();
            assert!(rel(fine.total, raw) < 1e-12);
            let aggregated = fine.aggregate().unwrap();
            for (a, b) in aggregated.entries.iter().zip(&coarse.entries) {
                assert_eq!(a.0, b.0);
                assert!((a.1 - b.1).abs() <= 1e-12 * b.1.abs().max(raw * 1e-3));
            }
        }
    }
}

#[test]
fn constant_function_has_zero_measure() {
    let g = build_point_graph(3, PointKind::Modified).unwrap();
    let f = GraphFunction::constant(g.graph(), 0.7);
    let measure = energy_measure(&g, &f, 2, 2.0, 1.25).unwrap();
    assert_eq!(measure.total, 0.0);
    assert!(measure.entries.iter().all(|e| e.1 == 0.0));
}

#[test]
fn energy_measure_is_symmetric() {
    let g = build_point_graph(3, PointKind::Modified).unwrap();
    let f = random_function(&g, 5);
    let base = energy_measure(&g, &f, 2, 2.0, 1.0).unwrap();
    for t in SymmetryElement::ALL {
        let moved = energy_measure(&g, &pullback_symmetry(&g, &f, t).unwrap(), 2, 2.0, 1.0).unwrap();
        for w in Word::all(2).unwrap() {
            let a = moved.mass(&w).unwrap();
            let b = base.mass(&apply_symmetry(t, &w)).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.max(1e-300), "{t:?} w={w}");
        }
    }
}

#[test]
fn energy_measure_is_local() {
    let g = build_point_graph(3, PointKind::Modified).unwrap();
    let f = random_function(&g, 8);
    let w = Word::new(&[2, 7]).unwrap();
    let b = cell_box(&w);
    let mut r = rng(9);
    let noise = random_values(&mut r, g.graph().vertex_count());
    let h = GraphFunction::new(
        g.graph(),
        g.points()
            .iter()
            .zip(&f.values)
            .zip(&noise)
            .map(|((pt, &v), &e)| if b.contains(pt) { v } else { v + e })
            .collect(),
    )
    .unwrap();
    let mf = energy_measure(&g, &f, 2, 3.0, 1.0).unwrap();
    let mh = energy_measure(&g, &h, 2, 3.0, 1.0).unwrap();
    assert_eq!(mf.mass(&w), mh.mass(&w));
    assert_ne!(mf.total, mh.total);
}

#[test]
fn coarsening_is_compatible_with_averaging() {
    let top = 4;
    let g = build_cell_graph(top, CellAdjacency::Full).unwrap();
    let mut r = rng(21);
    let f = GraphFunction::new(g.graph(), random_values(&mut r, g.graph().vertex_count())).unwrap();
    for mid in 1..top {
        let gm = build_cell_graph(mid, CellAdjacency::Full).unwrap();
        let fm = coarsen(&g, &f, mid).unwrap();
        for n in 0..=mid {
            let two_step = coarsen(&gm, &fm, n).unwrap();
            let direct = coarsen(&g, &f, n).unwrap();
            for (a, b) in two_step.values.iter().zip(&direct.values) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}

#[test]
fn discrete_measure_cell_masses() {
    let mut previous = f64::INFINITY;
    for n in 2..=6usize {
        let mu = discrete_measure(n).unwrap();
        assert!(rel(mu.weights().iter().sum::<f64>(), 1.0) < 1e-12);
        let masses = mu.cell_masses(1).unwrap();
        assert!(rel(masses.split.iter().sum::<f64>(), 1.0) < 1e-12);
        let k = (n - 2) as i32;
        let expected = (2.4 * 8f64.powi(k) + 1.6 * 3f64.powi(k)) / (2.4 * 8f64.powi(k + 1) + 1.6 * 3f64.powi(k + 1));
        for &c in &masses.closed {
            assert!(rel(c, expected) < 1e-12, "n={n}: {c} vs {expected}");
        }
        let gap = (masses.closed[0] - 0.125).abs();
        assert!(gap < previous);
        previous = gap;
    }
}

#[test]
fn discrete_measure_is_symmetric() {
    let mu = discrete_measure(4).unwrap();
    let masses = mu.cell_masses(2).unwrap();
    for t in SymmetryElement::ALL {
        for w in Word::all(2).unwrap() {
            let image = apply_symmetry(t, &w);
            assert_eq!(masses.closed[w.code() as usize], masses.closed[image.code() as usize]);
        }
    }
    let g = mu.graph();
    for t in SymmetryElement::ALL {
        let mut perm = g.symmetry_permutation(t).unwrap();
        perm.sort_unstable();
        assert!(perm.iter().enumerate().all(|(i, &v)| i as u32 == v));
    }
}

#[test]
fn lattice_points_map_into_cells() {
    for w in Word::all(2).unwrap() {
        let b = cell_box(&w);
        let centre = LatticePoint::new(0, 0, 0).apply_word(&w);
        assert!(b.contains(&centre));
    }
}
