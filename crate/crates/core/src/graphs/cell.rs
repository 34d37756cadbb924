use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_budget, CarpetGraph, Graph, GraphDocument, DEFAULT_VERTEX_BUDGET, UNREACHABLE};
use crate::carpet::{apply_symmetry, Intersection, SymmetryElement, Word, MAX_WORD_LEN};
use crate::error::{CarpetError, Result};

/// Which cell contacts count as edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellAdjacency {
    /// Cells sharing a segment or a single corner.
    Full,
    /// Cells sharing a segment only.
    Segment,
}

impl CellAdjacency {
    fn tag(self) -> &'static str {
        match self {
            CellAdjacency::Full => "cell",
            CellAdjacency::Segment => "cell-segment",
        }
    }
}

/// Graph whose vertices are level-`n` cells `K_w`, in lexicographic word order.
#[derive(Clone, Debug)]
pub struct CellGraph {
    level: usize,
    adjacency: CellAdjacency,
    words: Vec<Word>,
    kinds: Vec<Intersection>,
    graph: Graph,
    subsets: BTreeMap<String, Vec<u32>>,
    complete: bool,
}

const DIRECTIONS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Builds `G_n` over all `8^n` words.
pub fn build_cell_graph(n: usize, adjacency: CellAdjacency) -> Result<CellGraph> {
    CellGraph::build(n, adjacency, DEFAULT_VERTEX_BUDGET)
}

impl CellGraph {
    pub fn build(n: usize, adjacency: CellAdjacency, budget: u64) -> Result<CellGraph> {
        if n == 0 {
            return Err(CarpetError::InvalidLevel(
                "cell graphs need level at least 1".into(),
            ));
        }
        if n > MAX_WORD_LEN {
            return Err(CarpetError::WordTooLong(n));
        }
        check_budget(n, 8u64.pow(n as u32), budget)?;
        let words: Vec<Word> = Word::all(n)?.collect();
        let g = Self::from_words(format!("{}/{n}", adjacency.tag()), n, adjacency, words)?;
        if adjacency == CellAdjacency::Full {
            assert!(g.graph.max_degree() <= 7, "cell graph degree exceeds 7");
        }
        Ok(g)
    }

    /// Induced cell graph on a sorted set of distinct level-`level` words,
    /// built from grid adjacency without materialising the ambient graph.
    pub(crate) fn from_words(
        id: String,
        level: usize,
        adjacency: CellAdjacency,
        words: Vec<Word>,
    ) -> Result<CellGraph> {
        if words.iter().any(|w| w.len() != level) {
            return Err(CarpetError::InvalidArgument(format!(
                "all words must have length {level}"
            )));
        }
        if words.windows(2).any(|p| p[0] >= p[1]) {
            return Err(CarpetError::InvalidArgument(
                "words must be sorted and distinct".into(),
            ));
        }
        let complete = words.len() as u64 == 8u64.pow(level as u32);
        let side = 3i64.pow(level as u32);
        let lookup = |w: Word| -> Option<u32> {
            if complete {
                Some(w.code() as u32)
            } else {
                words.binary_search(&w).ok().map(|i| i as u32)
            }
        };
        let mut edges = Vec::new();
        let mut kinds = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut boundary = Vec::new();
        let mut scratch: Vec<(u32, Intersection)> = Vec::with_capacity(8);
        for (v, w) in words.iter().enumerate() {
            let (gx, gy) = w.grid_position();
            let (gx, gy) = (gx as i64, gy as i64);
            if gx == 0 {
                left.push(v as u32);
            }
            if gx == side - 1 {
                right.push(v as u32);
            }
            if gx == 0 || gy == 0 || gx == side - 1 || gy == side - 1 {
                boundary.push(v as u32);
            }
            scratch.clear();
            for (dx, dy) in DIRECTIONS {
                let kind = if dx == 0 || dy == 0 {
                    Intersection::Segment
                } else {
                    Intersection::Point
                };
                if adjacency == CellAdjacency::Segment && kind == Intersection::Point {
                    continue;
                }
                let (nx, ny) = (gx + dx, gy + dy);
                if nx < 0 || ny < 0 || nx >= side || ny >= side {
                    continue;
                }
                let Some(u) = Word::from_grid(level, nx as u64, ny as u64).and_then(lookup) else {
                    continue;
                };
                if u as usize > v {
                    scratch.push((u, kind));
                }
            }
            scratch.sort_unstable_by_key(|&(u, _)| u);
            for &(u, kind) in &scratch {
                edges.push([v as u32, u]);
                kinds.push(kind);
            }
        }
        let graph = Graph::from_edges(id, words.len(), edges)?;
        let subsets = BTreeMap::from([
            ("boundary".to_string(), boundary),
            ("left".to_string(), left),
            ("right".to_string(), right),
        ]);
        Ok(CellGraph {
            level,
            adjacency,
            words,
            kinds,
            graph,
            subsets,
            complete,
        })
    }

    pub fn adjacency(&self) -> CellAdjacency {
        self.adjacency
    }

    /// Vertex words in canonical order.
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// Contact type of each edge, aligned with `graph().edges()`.
    pub fn edge_kinds(&self) -> &[Intersection] {
        &self.kinds
    }

    pub fn index_of(&self, w: &Word) -> Option<u32> {
        if self.complete {
            (w.len() == self.level).then_some(w.code() as u32)
        } else {
            self.words.binary_search(w).ok().map(|i| i as u32)
        }
    }

    /// Vertices whose word starts with `prefix`.
    pub fn block(&self, prefix: &Word) -> Vec<u32> {
        let lo = self.words.partition_point(|w| w.prefix(prefix.len()) < *prefix);
        let hi = self.words.partition_point(|w| w.prefix(prefix.len()) <= *prefix);
        (lo as u32..hi as u32).collect()
    }

    /// Sets a named vertex subset.
    pub fn set_subset(&mut self, name: &str, mut vertices: Vec<u32>) -> Result<()> {
        vertices.sort_unstable();
        vertices.dedup();
        if let Some(&v) = vertices.iter().find(|&&v| v as usize >= self.words.len()) {
            return Err(CarpetError::VertexOutOfRange(v));
        }
        self.subsets.insert(name.to_string(), vertices);
        Ok(())
    }

    pub fn to_document(&self) -> GraphDocument<Word> {
        GraphDocument {
            kind: self.adjacency.tag().to_string(),
            level: self.level,
            vertex_count: self.words.len(),
            vertices: self.words.clone(),
            edges: self
                .graph
                .edges()
                .iter()
                .zip(&self.kinds)
                .map(|(&[a, b], k)| {
                    let tag = match k {
                        Intersection::Segment => "segment",
                        _ => "point",
                    };
                    (a, b, tag)
                })
                .collect(),
            subsets: self.subsets.clone(),
        }
    }
}

impl CarpetGraph for CellGraph {
    fn graph(&self) -> &Graph {
        &self.graph
    }

    fn level(&self) -> usize {
        self.level
    }

    fn symmetry_permutation(&self, t: SymmetryElement) -> Result<Vec<u32>> {
        self.words
            .iter()
            .map(|w| {
                self.index_of(&apply_symmetry(t, w)).ok_or_else(|| {
                    CarpetError::InvalidArgument(format!(
                        "vertex set is not invariant under {}",
                        t.name()
                    ))
                })
            })
            .collect()
    }

    fn embed_into(&self, finer: &Self, i: u8) -> Result<Vec<u32>> {
        let prefix = Word::new(&[i])?;
        self.words
            .iter()
            .map(|w| {
                let image = prefix.concat(w)?;
                finer.index_of(&image).ok_or_else(|| {
                    CarpetError::Misaligned(format!("cell {image} missing from the finer graph"))
                })
            })
            .collect()
    }

    fn subsets(&self) -> &BTreeMap<String, Vec<u32>> {
        &self.subsets
    }
}

/// Induced subgraph on the vertex subset `a` (any order, no repeats).
pub fn restrict_subgraph(g: &CellGraph, a: &[u32]) -> Result<CellGraph> {
    let mut subset = a.to_vec();
    subset.sort_unstable();
    if subset.windows(2).any(|p| p[0] == p[1]) {
        return Err(CarpetError::InvalidArgument("repeated vertex in subset".into()));
    }
    if let Some(&v) = subset.iter().find(|&&v| v as usize >= g.words.len()) {
        return Err(CarpetError::VertexOutOfRange(v));
    }
    let id = format!("{}[{:016x}]", g.graph.id(), fingerprint(&subset));
    let (graph, kept) = g.graph.induced(id, &subset)?;
    let mut new_index = vec![UNREACHABLE; g.words.len()];
    for (k, &v) in subset.iter().enumerate() {
        new_index[v as usize] = k as u32;
    }
    let subsets = g
        .subsets
        .iter()
        .map(|(name, vs)| {
            let kept: Vec<u32> = vs
                .iter()
                .map(|&v| new_index[v as usize])
                .filter(|&v| v != UNREACHABLE)
                .collect();
            (name.clone(), kept)
        })
        .collect();
    Ok(CellGraph {
        level: g.level,
        adjacency: g.adjacency,
        words: subset.iter().map(|&v| g.words[v as usize]).collect(),
        kinds: kept.iter().map(|&e| g.kinds[e]).collect(),
        graph,
        subsets,
        complete: subset.len() == g.words.len() && g.complete,
    })
}

pub(crate) fn fingerprint(values: &[u32]) -> u64 {
    values.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &v| {
        (h ^ u64::from(v)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// `B_n(w, k)`: the level-`|w| + n` words below cells within graph distance
/// `k` of `w` in `G_{|w|}`, in lexicographic order.
pub fn block_neighborhood(w: &Word, k: usize, n: usize) -> Result<Vec<Word>> {
    if w.is_empty() {
        return Ok(Word::all(n)?.collect());
    }
    let g = build_cell_graph(w.len(), CellAdjacency::Full)?;
    block_neighborhood_in(&g, w, k, n)
}

/// As [`block_neighborhood`], reusing a prebuilt `G_{|w|}`.
pub fn block_neighborhood_in(g: &CellGraph, w: &Word, k: usize, n: usize) -> Result<Vec<Word>> {
    let v = g
        .index_of(w)
        .ok_or_else(|| CarpetError::InvalidArgument(format!("{w} is not a vertex")))?;
    let dist = g.graph.bfs(&[v]);
    let level = w.len() + n;
    if level > MAX_WORD_LEN {
        return Err(CarpetError::WordTooLong(level));
    }
    let width = 1u64 << (3 * n);
    let mut out = Vec::new();
    for (u, &d) in dist.iter().enumerate() {
        if d as usize <= k {
            let base = g.words[u].code() * width;
            out.extend((base..base + width).map(|c| Word::from_code(level, c).expect("in range")));
        }
    }
    Ok(out)
}
