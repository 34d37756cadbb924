use std::collections::BTreeMap;

use super::{check_budget, CarpetGraph, CellAdjacency, CellGraph, Graph, DEFAULT_VERTEX_BUDGET};
use crate::carpet::{SymmetryElement, Word};
use crate::error::{CarpetError, Result};

/// `M` copies of `G_n` glued left to right along the bottom row of level-`m`
/// cells, as an induced subgraph of `G_{n+m}`.
#[derive(Clone, Debug)]
pub struct ChainGraph {
    base_level: usize,
    copies: usize,
    path_level: usize,
    cells: CellGraph,
}

/// Smallest `m` with `3^m >= copies`.
pub fn chain_path_level(copies: usize) -> usize {
    let mut m = 0;
    let mut cap = 1usize;
    while cap < copies {
        cap *= 3;
        m += 1;
    }
    m
}

pub fn build_chain_graph(n: usize, copies: usize) -> Result<ChainGraph> {
    ChainGraph::build(n, copies, DEFAULT_VERTEX_BUDGET)
}

impl ChainGraph {
    pub fn build(n: usize, copies: usize, budget: u64) -> Result<ChainGraph> {
        if copies < 2 {
            return Err(CarpetError::InvalidArgument(
                "a chain needs at least two copies".into(),
            ));
        }
        let m = chain_path_level(copies);
        let per_copy = 8u64.pow(n as u32);
        check_budget(n + m, copies as u64 * per_copy, budget)?;
        let path: Vec<Word> = (0..copies as u64)
            .map(|i| Word::from_grid(m, i, 0).expect("bottom-row cells exist"))
            .collect();
        let mut words = Vec::with_capacity(copies * per_copy as usize);
        for head in &path {
            for tail in Word::all(n)? {
                words.push(head.concat(&tail)?);
            }
        }
        let id = format!("chain/{n}/{copies}");
        let mut cells = CellGraph::from_words(id, n + m, CellAdjacency::Full, words)?;
        let per_copy = per_copy as u32;
        let last = (copies as u32 - 1) * per_copy;
        cells.set_subset("left", (0..per_copy).collect())?;
        cells.set_subset("right", (last..last + per_copy).collect())?;
        Ok(ChainGraph {
            base_level: n,
            copies,
            path_level: m,
            cells,
        })
    }

    pub fn base_level(&self) -> usize {
        self.base_level
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// Level `m` of the path cells.
    pub fn path_level(&self) -> usize {
        self.path_level
    }

    pub fn cells(&self) -> &CellGraph {
        &self.cells
    }

    /// Vertices belonging to copy `i` (0-based).
    pub fn copy_vertices(&self, i: usize) -> std::ops::Range<u32> {
        let per = 8u32.pow(self.base_level as u32);
        i as u32 * per..(i as u32 + 1) * per
    }

    pub fn left(&self) -> &[u32] {
        self.cells.subset("left").expect("set at construction")
    }

    pub fn right(&self) -> &[u32] {
        self.cells.subset("right").expect("set at construction")
    }
}

impl CarpetGraph for ChainGraph {
    fn graph(&self) -> &Graph {
        self.cells.graph()
    }

    fn level(&self) -> usize {
        self.base_level
    }

    fn symmetry_permutation(&self, t: SymmetryElement) -> Result<Vec<u32>> {
        self.cells.symmetry_permutation(t)
    }

    fn embed_into(&self, _finer: &Self, _i: u8) -> Result<Vec<u32>> {
        Err(CarpetError::InvalidArgument(
            "chains are not self-similar".into(),
        ))
    }

    fn subsets(&self) -> &BTreeMap<String, Vec<u32>> {
        self.cells.subsets()
    }
}
