use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{check_budget, CarpetGraph, Graph, GraphDocument, DEFAULT_VERTEX_BUDGET};
use crate::carpet::{pow3, LatticePoint, SymmetryElement, Word};
use crate::error::{CarpetError, Result};

/// Which base graph is replicated into every cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    /// Edge midpoints plus quarter-diagonal points, joined in an 8-cycle.
    Modified,
    /// Edge midpoints only, joined in a 4-cycle.
    Simple,
}

impl PointKind {
    fn tag(self) -> &'static str {
        match self {
            PointKind::Modified => "point",
            PointKind::Simple => "point-simple",
        }
    }
}

/// Base vertices inside a cell of side 12 (coordinates relative to the lower
/// left corner), listed in cycle order.
pub(super) const MODIFIED_BASE: [(i64, i64); 8] = [
    (0, 6),
    (3, 3),
    (6, 0),
    (9, 3),
    (12, 6),
    (9, 9),
    (6, 12),
    (3, 9),
];
const SIMPLE_BASE: [(i64, i64); 4] = [(6, 0), (12, 6), (6, 12), (0, 6)];

/// Vertex count of the simple point graph at level `n >= 1`.
pub fn simple_point_count(n: usize) -> u64 {
    assert!(n >= 1, "point graphs start at level 1");
    let k = (n - 1) as u32;
    (12 * 8u64.pow(k) + 8 * 3u64.pow(k)) / 5
}

/// Point graph: each level-`(n-1)` cell carries a copy of the base graph;
/// copies share the midpoints of common cell edges.
#[derive(Clone, Debug)]
pub struct PointGraph {
    level: usize,
    kind: PointKind,
    points: Vec<LatticePoint>,
    cell_of_edge: Vec<Word>,
    graph: Graph,
    index: HashMap<(i64, i64), u32>,
    subsets: BTreeMap<String, Vec<u32>>,
}

pub fn build_point_graph(n: usize, kind: PointKind) -> Result<PointGraph> {
    PointGraph::build(n, kind, DEFAULT_VERTEX_BUDGET)
}

impl PointGraph {
    pub fn build(n: usize, kind: PointKind, budget: u64) -> Result<PointGraph> {
        if n == 0 {
            return Err(CarpetError::InvalidLevel(
                "point graphs need level at least 1".into(),
            ));
        }
        let simple = simple_point_count(n);
        let expected = match kind {
            PointKind::Simple => simple,
            PointKind::Modified => simple + 4 * 8u64.pow(n as u32 - 1),
        };
        check_budget(n, expected, budget)?;
        let base: &[(i64, i64)] = match kind {
            PointKind::Modified => &MODIFIED_BASE,
            PointKind::Simple => &SIMPLE_BASE,
        };
        let half = 2 * pow3(n as u32);
        let mut raw_index: HashMap<(i64, i64), u32> = HashMap::with_capacity(expected as usize);
        let mut raw_points: Vec<(i64, i64)> = Vec::with_capacity(expected as usize);
        let mut raw_edges: Vec<([u32; 2], Word)> = Vec::new();
        let mut local = vec![0u32; base.len()];
        for w in Word::all(n - 1)? {
            let (gx, gy) = w.grid_position();
            let (x0, y0) = (12 * gx as i64 - half, 12 * gy as i64 - half);
            for (slot, &(dx, dy)) in local.iter_mut().zip(base) {
                let key = (x0 + dx, y0 + dy);
                *slot = *raw_index.entry(key).or_insert_with(|| {
                    raw_points.push(key);
                    raw_points.len() as u32 - 1
                });
            }
            for k in 0..base.len() {
                let (a, b) = (local[k], local[(k + 1) % base.len()]);
                raw_edges.push(([a.min(b), a.max(b)], w));
            }
        }
        let mut order: Vec<u32> = (0..raw_points.len() as u32).collect();
        order.sort_unstable_by_key(|&i| raw_points[i as usize]);
        let mut relabel = vec![0u32; raw_points.len()];
        for (new, &old) in order.iter().enumerate() {
            relabel[old as usize] = new as u32;
        }
        let points: Vec<LatticePoint> = order
            .iter()
            .map(|&i| {
                let (x, y) = raw_points[i as usize];
                LatticePoint::new(x, y, n as u32)
            })
            .collect();
        let mut edges: Vec<([u32; 2], Word)> = raw_edges
            .into_iter()
            .map(|([a, b], w)| {
                let (a, b) = (relabel[a as usize], relabel[b as usize]);
                ([a.min(b), a.max(b)], w)
            })
            .collect();
        edges.sort_unstable_by_key(|&(e, _)| e);
        let cell_of_edge = edges.iter().map(|&(_, w)| w).collect();
        let id = format!("{}/{n}", kind.tag());
        let graph = Graph::from_edges(id, points.len(), edges.into_iter().map(|(e, _)| e).collect())?;
        let index: HashMap<(i64, i64), u32> = points
            .iter()
            .enumerate()
            .map(|(i, p)| ((p.x, p.y), i as u32))
            .collect();
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut boundary = Vec::new();
        for (i, p) in points.iter().enumerate() {
            if p.x == -half {
                left.push(i as u32);
            }
            if p.x == half {
                right.push(i as u32);
            }
            if p.x.abs() == half || p.y.abs() == half {
                boundary.push(i as u32);
            }
        }
        let subsets = BTreeMap::from([
            ("boundary".to_string(), boundary),
            ("left".to_string(), left),
            ("right".to_string(), right),
        ]);
        Ok(PointGraph {
            level: n,
            kind,
            points,
            cell_of_edge,
            graph,
            index,
            subsets,
        })
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    /// Vertex coordinates at denominator level `n`, sorted by `(x, y)`.
    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    /// Level-`(n-1)` cell containing each edge, aligned with the edge list.
    pub fn cell_of_edge(&self) -> &[Word] {
        &self.cell_of_edge
    }

    /// Index of a vertex given by exact coordinates at any denominator level.
    pub fn index_of(&self, p: &LatticePoint) -> Option<u32> {
        let q = p.at_level(self.level as u32).ok()?;
        self.index.get(&(q.x, q.y)).copied()
    }

    pub fn to_document(&self) -> GraphDocument<LatticePoint> {
        GraphDocument {
            kind: self.kind.tag().to_string(),
            level: self.level,
            vertex_count: self.points.len(),
            vertices: self.points.clone(),
            edges: self.graph.edges().iter().map(|&[a, b]| (a, b, "edge")).collect(),
            subsets: self.subsets.clone(),
        }
    }
}

impl CarpetGraph for PointGraph {
    fn graph(&self) -> &Graph {
        &self.graph
    }

    fn level(&self) -> usize {
        self.level
    }

    fn symmetry_permutation(&self, t: SymmetryElement) -> Result<Vec<u32>> {
        self.points
            .iter()
            .map(|p| {
                self.index_of(&p.apply_symmetry(t))
                    .ok_or_else(|| CarpetError::Misaligned("symmetry image is not a vertex".into()))
            })
            .collect()
    }

    fn embed_into(&self, finer: &Self, i: u8) -> Result<Vec<u32>> {
        if finer.level != self.level + 1 || finer.kind != self.kind {
            return Err(CarpetError::Misaligned(
                "embedding needs the next level of the same kind".into(),
            ));
        }
        self.points
            .iter()
            .map(|p| {
                let image = p.apply_map(i)?;
                finer
                    .index_of(&image)
                    .ok_or_else(|| CarpetError::Misaligned("image is not a vertex".into()))
            })
            .collect()
    }

    fn subsets(&self) -> &BTreeMap<String, Vec<u32>> {
        &self.subsets
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_graphs() {
        let g = build_point_graph(1, PointKind::Modified).unwrap();
        assert_eq!(g.graph().vertex_count(), 8);
        assert_eq!(g.graph().edge_count(), 8);
        assert!((0..8).all(|v| g.graph().degree(v) == 2));
        assert!(g.graph().is_connected());
        let s = build_point_graph(1, PointKind::Simple).unwrap();
        assert_eq!(s.graph().vertex_count(), 4);
        assert_eq!(s.graph().edge_count(), 4);
    }

    #[test]
    fn second_level_counts() {
        assert_eq!(build_point_graph(2, PointKind::Simple).unwrap().graph().vertex_count(), 24);
        assert_eq!(build_point_graph(2, PointKind::Modified).unwrap().graph().vertex_count(), 56);
    }

    #[test]
    fn sides_are_marked() {
        let g = build_point_graph(2, PointKind::Modified).unwrap();
        assert_eq!(g.subset("left").unwrap().len(), 3);
        assert_eq!(g.subset("right").unwrap().len(), 3);
    }
}
