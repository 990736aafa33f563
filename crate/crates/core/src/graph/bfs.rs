use rayon::prelude::*;

use super::{FaultKind, FaultSet, Graph, GraphError, Vertex};

/// Distance sentinel for unreachable vertices. Compares above every finite
/// distance.
pub const UNREACHABLE: u32 = u32::MAX;

/// Reusable BFS buffers.
#[derive(Clone, Debug, Default)]
pub struct BfsScratch {
    pub dist: Vec<u32>,
    queue: Vec<Vertex>,
}

impl BfsScratch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Hop distances from `src` in `g - faults`. Faults must already be
    /// expressed in `g`'s id space. A failed source yields all-unreachable.
    pub fn run(&mut self, g: &Graph, src: Vertex, faults: &FaultSet) -> &[u32] {
        self.run_filtered(g, src, |e| !faults.blocks_edge(e), |v| !faults.blocks_vertex(v))
    }

    /// BFS keeping only edges and vertices accepted by the two predicates.
    pub fn run_filtered<E, V>(&mut self, g: &Graph, src: Vertex, edge_ok: E, vertex_ok: V) -> &[u32]
    where
        E: Fn(usize) -> bool,
        V: Fn(Vertex) -> bool,
    {
        self.dist.clear();
        self.dist.resize(g.n(), UNREACHABLE);
        self.queue.clear();
        if !vertex_ok(src) {
            return &self.dist;
        }
        self.dist[src] = 0;
        self.queue.push(src);
        let mut head = 0;
        while head < self.queue.len() {
            let x = self.queue[head];
            head += 1;
            let next = self.dist[x] + 1;
            for (y, e) in g.arcs(x) {
                if self.dist[y] == UNREACHABLE && edge_ok(e) && vertex_ok(y) {
                    self.dist[y] = next;
                    self.queue.push(y);
                }
            }
        }
        &self.dist
    }
}

fn check_query(g: &Graph, src: Vertex, faults: &FaultSet) -> Result<(), GraphError> {
    g.check_vertex(src)?;
    faults.validate(g)?;
    if faults.blocks_vertex(src) {
        return Err(GraphError::SourceFailed(src));
    }
    Ok(())
}

/// Exact hop distances from `src` in `g - faults`.
pub fn bfs_distances(g: &Graph, src: Vertex, faults: &FaultSet) -> Result<Vec<u32>, GraphError> {
    check_query(g, src, faults)?;
    let mut scratch = BfsScratch::new();
    scratch.run(g, src, faults);
    Ok(scratch.dist)
}

/// Row-major `n x n` hop-distance matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
    failed: Vec<bool>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: Vertex, v: Vertex) -> u32 {
        self.data[u * self.n + v]
    }

    pub fn row(&self, u: Vertex) -> &[u32] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    /// False for failed vertices, whose rows and columns carry no distances.
    pub fn is_valid(&self, v: Vertex) -> bool {
        !self.failed[v]
    }
}

/// Distances between every pair of vertices of `g - faults`. Rows of failed
/// vertices are all [`UNREACHABLE`] and flagged invalid.
pub fn all_pairs_distances(g: &Graph, faults: &FaultSet) -> Result<DistanceMatrix, GraphError> {
    faults.validate(g)?;
    let n = g.n();
    let mut data = vec![UNREACHABLE; n * n];
    if n > 0 {
        data.par_chunks_mut(n).enumerate().for_each_init(BfsScratch::new, |scratch, (s, row)| {
            row.copy_from_slice(scratch.run(g, s, faults));
        });
    }
    let failed = (0..n).map(|v| faults.blocks_vertex(v)).collect();
    Ok(DistanceMatrix { n, data, failed })
}

/// BFS tree whose parent pointers follow the lowest-id rule: the parent of
/// `v` is the smallest neighbor one level closer to the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortestPathTree {
    pub root: Vertex,
    pub dist: Vec<u32>,
    pub parent: Vec<Option<Vertex>>,
}

impl ShortestPathTree {
    pub(crate) fn build<E, V>(g: &Graph, root: Vertex, scratch: &mut BfsScratch, edge_ok: E, vertex_ok: V) -> Self
    where
        E: Fn(usize) -> bool + Copy,
        V: Fn(Vertex) -> bool + Copy,
    {
        let dist = scratch.run_filtered(g, root, edge_ok, vertex_ok).to_vec();
        let parent = (0..g.n())
            .map(|v| {
                if v == root || dist[v] == UNREACHABLE {
                    return None;
                }
                g.arcs(v).find(|&(x, e)| dist[x] != UNREACHABLE && dist[x] + 1 == dist[v] && edge_ok(e)).map(|(x, _)| x)
            })
            .collect();
        Self { root, dist, parent }
    }

    /// Vertices from the root to `v`, or `None` if `v` is unreachable.
    pub fn path_to(&self, v: Vertex) -> Option<Vec<Vertex>> {
        if self.dist[v] == UNREACHABLE {
            return None;
        }
        let mut path = Vec::with_capacity(self.dist[v] as usize + 1);
        let mut cur = v;
        path.push(cur);
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }

    /// Tree edges as `(parent, child)` pairs.
    pub fn tree_edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.parent.iter().enumerate().filter_map(|(v, p)| p.map(|p| (p, v)))
    }
}

/// Canonical shortest-path tree of `g - faults` rooted at `root`.
pub fn shortest_path_tree(g: &Graph, root: Vertex, faults: &FaultSet) -> Result<ShortestPathTree, GraphError> {
    check_query(g, root, faults)?;
    let mut scratch = BfsScratch::new();
    Ok(ShortestPathTree::build(g, root, &mut scratch, |e| !faults.blocks_edge(e), |v| !faults.blocks_vertex(v)))
}

/// The canonical shortest `u`-`v` path in `g - faults`: BFS from `u`, then
/// walk lowest-id parents back from `v`.
pub fn canonical_shortest_path(g: &Graph, u: Vertex, v: Vertex, faults: &FaultSet) -> Result<Vec<Vertex>, GraphError> {
    g.check_vertex(v)?;
    if faults.kind() == FaultKind::Vertex && faults.blocks_vertex(v) {
        return Err(GraphError::Disconnected(u, v));
    }
    let tree = shortest_path_tree(g, u, faults)?;
    tree.path_to(v).ok_or(GraphError::Disconnected(u, v))
}
