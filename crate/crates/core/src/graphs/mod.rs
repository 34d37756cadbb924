//! Graph families approximating the carpet.
//!
//! Every family wraps a [`Graph`]: an undirected simple graph stored as an
//! edge list plus a CSR adjacency, with vertices indexed in a canonical order.

mod cell;
mod chain;
mod isometry;
mod point;

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::carpet::SymmetryElement;
use crate::error::{CarpetError, Result};

pub use cell::{block_neighborhood, build_cell_graph, restrict_subgraph, CellAdjacency, CellGraph};
pub use chain::{build_chain_graph, chain_path_level, ChainGraph};
pub use isometry::rough_isometry_points_to_cells;
pub use point::{build_point_graph, simple_point_count, PointGraph, PointKind};

/// Largest vertex count a builder accepts unless told otherwise.
pub const DEFAULT_VERTEX_BUDGET: u64 = 10_000_000;

/// Distance value for unreachable vertices.
pub const UNREACHABLE: u32 = u32::MAX;

/// Undirected simple graph with canonical vertex indices `0..n`.
#[derive(Clone, Debug)]
pub struct Graph {
    id: String,
    n: usize,
    edges: Vec<[u32; 2]>,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
}

impl Graph {
    /// Builds the graph; each edge must satisfy `i < j < n` and appear once.
    pub fn from_edges(id: impl Into<String>, n: usize, edges: Vec<[u32; 2]>) -> Result<Self> {
        let mut degree = vec![0usize; n];
        for &[a, b] in &edges {
            if a >= b || b as usize >= n {
                return Err(CarpetError::InvalidArgument(format!(
                    "edge ({a}, {b}) is not an ordered pair of vertices below {n}"
                )));
            }
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adjacency = vec![0u32; offsets[n]];
        for &[a, b] in &edges {
            adjacency[fill[a as usize]] = b;
            fill[a as usize] += 1;
            adjacency[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for v in 0..n {
            let slot = &mut adjacency[offsets[v]..offsets[v + 1]];
            slot.sort_unstable();
            if slot.windows(2).any(|w| w[0] == w[1]) {
                return Err(CarpetError::InvalidArgument(format!(
                    "duplicate edge at vertex {v}"
                )));
            }
        }
        Ok(Graph {
            id: id.into(),
            n,
            edges,
            offsets,
            adjacency,
        })
    }

    /// Identifier carried by functions defined on this graph.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges `[i, j]` with `i < j`.
    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    /// Breadth-first distances from a set of sources.
    pub fn bfs(&self, sources: &[u32]) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize] == UNREACHABLE {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v as usize] + 1;
            for &u in self.neighbors(v as usize) {
                if dist[u as usize] == UNREACHABLE {
                    dist[u as usize] = d;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Connected component label per vertex, labels in order of first vertex.
    pub fn components(&self) -> Vec<u32> {
        let mut label = vec![UNREACHABLE; self.n];
        let mut next = 0;
        for v in 0..self.n {
            if label[v] != UNREACHABLE {
                continue;
            }
            label[v] = next;
            let mut stack = vec![v as u32];
            while let Some(x) = stack.pop() {
                for &u in self.neighbors(x as usize) {
                    if label[u as usize] == UNREACHABLE {
                        label[u as usize] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs(&[0]).iter().all(|&d| d != UNREACHABLE)
    }

    /// Induced subgraph on `subset` (sorted, distinct); returns the graph and
    /// the indices of the kept edges.
    pub fn induced(&self, id: impl Into<String>, subset: &[u32]) -> Result<(Graph, Vec<usize>)> {
        let mut new_index = vec![UNREACHABLE; self.n];
        for (k, &v) in subset.iter().enumerate() {
            let slot = new_index
                .get_mut(v as usize)
                .ok_or(CarpetError::VertexOutOfRange(v))?;
            if *slot != UNREACHABLE {
                return Err(CarpetError::InvalidArgument(format!("vertex {v} listed twice")));
            }
            *slot = k as u32;
        }
        let mut edges = Vec::new();
        let mut kept = Vec::new();
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            let (na, nb) = (new_index[a as usize], new_index[b as usize]);
            if na != UNREACHABLE && nb != UNREACHABLE {
                edges.push([na.min(nb), na.max(nb)]);
                kept.push(e);
            }
        }
        Ok((Graph::from_edges(id, subset.len(), edges)?, kept))
    }
}

/// Behaviour shared by the carpet graph families.
pub trait CarpetGraph {
    fn graph(&self) -> &Graph;

    /// Level `n` of the approximation.
    fn level(&self) -> usize;

    /// `perm[v]` is the index of the image of vertex `v` under `t`.
    fn symmetry_permutation(&self, t: SymmetryElement) -> Result<Vec<u32>>;

    /// For each vertex `v` of `self`, the index of its image under `F_i` in
    /// the next-finer graph `finer`.
    fn embed_into(&self, finer: &Self, i: u8) -> Result<Vec<u32>>;

    /// Named vertex subsets (boundary, left, right, ...).
    fn subsets(&self) -> &BTreeMap<String, Vec<u32>>;

    fn subset(&self, name: &str) -> Result<&[u32]> {
        self.subsets()
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| CarpetError::InvalidArgument(format!("no subset named {name:?}")))
    }
}

/// JSON shape shared by all graph serializations.
#[derive(Serialize)]
pub struct GraphDocument<V: Serialize> {
    pub kind: String,
    pub level: usize,
    pub vertex_count: usize,
    pub vertices: Vec<V>,
    pub edges: Vec<(u32, u32, &'static str)>,
    pub subsets: BTreeMap<String, Vec<u32>>,
}

pub(crate) fn check_budget(level: usize, vertices: u64, budget: u64) -> Result<()> {
    if vertices > budget {
        return Err(CarpetError::BudgetExceeded {
            level,
            vertices,
            budget,
        });
    }
    Ok(())
}
