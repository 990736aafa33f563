//! Compact immutable undirected simple graphs with stable edge identifiers,
//! fault sets, and exact hop-count distances.
//!
//! Vertices are `0..n`. Edges are stored once as `(u, v)` with `u < v` and
//! receive dense identifiers `0..m` in lexicographic order of their
//! endpoints, so edge id order is also the canonical scan order used by the
//! constructions.

mod bfs;
mod io;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use bfs::{
    all_pairs_distances, bfs_distances, canonical_shortest_path, shortest_path_tree, BfsScratch, DistanceMatrix,
    ShortestPathTree, UNREACHABLE,
};
pub use io::{read_edge_list, write_edge_list};

pub type Vertex = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(Vertex, Vertex),
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("edge id {id} out of range for a graph with {m} edges")]
    EdgeOutOfRange { id: EdgeId, m: usize },
    #[error("no edge between {0} and {1}")]
    NoSuchEdge(Vertex, Vertex),
    #[error("fault item {0} listed twice")]
    DuplicateFault(usize),
    #[error("source vertex {0} is a failed vertex")]
    SourceFailed(Vertex),
    #[error("vertices {0} and {1} are disconnected")]
    Disconnected(Vertex, Vertex),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
    arc_edge: Vec<EdgeId>,
    endpoints: Vec<(Vertex, Vertex)>,
}

impl Graph {
    /// Builds a graph from unordered vertex pairs. Pairs may be given in
    /// either orientation and in any order; self-loops and repeated pairs
    /// are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut endpoints = Vec::new();
        for (a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            endpoints.push((a.min(b), a.max(b)));
        }
        endpoints.sort_unstable();
        if let Some(w) = endpoints.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        Ok(Self::from_sorted_unique(n, endpoints))
    }

    fn from_sorted_unique(n: usize, endpoints: Vec<(Vertex, Vertex)>) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in &endpoints {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0; offsets[n]];
        let mut arc_edge = vec![0; offsets[n]];
        // Edges are sorted by (u, v), so both sides of every adjacency list
        // are filled in increasing neighbor order.
        for (id, &(u, v)) in endpoints.iter().enumerate() {
            targets[cursor[u]] = v;
            arc_edge[cursor[u]] = id;
            cursor[u] += 1;
        }
        for (id, &(u, v)) in endpoints.iter().enumerate() {
            targets[cursor[v]] = u;
            arc_edge[cursor[v]] = id;
            cursor[v] += 1;
        }
        for v in 0..n {
            let range = offsets[v]..offsets[v + 1];
            let mut arcs: Vec<(Vertex, EdgeId)> =
                targets[range.clone()].iter().copied().zip(arc_edge[range.clone()].iter().copied()).collect();
            arcs.sort_unstable();
            for (slot, (t, e)) in range.zip(arcs) {
                targets[slot] = t;
                arc_edge[slot] = e;
            }
        }
        Self { n, offsets, targets, arc_edge, endpoints }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.endpoints.len()
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `(neighbor, edge id)` pairs of `v` in increasing neighbor order.
    pub fn arcs(&self, v: Vertex) -> impl Iterator<Item = (Vertex, EdgeId)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()].iter().copied().zip(self.arc_edge[range].iter().copied())
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Endpoints `(u, v)` with `u < v`.
    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.endpoints[e]
    }

    /// All edges in id order.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.endpoints
    }

    pub fn edge_id(&self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        if u >= self.n || v >= self.n {
            return None;
        }
        let nbrs = self.neighbors(u);
        nbrs.binary_search(&v).ok().map(|i| self.arc_edge[self.offsets[u] + i])
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edge_id(u, v).is_some()
    }

    /// The spanning subgraph on the same vertex set keeping only `ids`.
    /// Edge ids of the result are its own dense ids, not the host's.
    pub fn edge_subgraph(&self, ids: &[EdgeId]) -> Result<Graph, GraphError> {
        let mut endpoints = Vec::with_capacity(ids.len());
        for &id in ids {
            if id >= self.m() {
                return Err(GraphError::EdgeOutOfRange { id, m: self.m() });
            }
            endpoints.push(self.endpoints[id]);
        }
        Graph::from_edges(self.n, endpoints)
    }

    /// SHA-256 of the normalized edge-list text, hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(write_edge_list(self).as_bytes()))
    }

    pub(crate) fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultKind {
    Edge,
    Vertex,
}

impl std::fmt::Display for FaultKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FaultKind::Edge => "edge",
            FaultKind::Vertex => "vertex",
        })
    }
}

impl std::str::FromStr for FaultKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge" | "eft" => Ok(FaultKind::Edge),
            "vertex" | "vft" => Ok(FaultKind::Vertex),
            other => Err(format!("unknown fault kind `{other}` (expected edge or vertex)")),
        }
    }
}

/// A set of failed edges or failed vertices, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaultSet {
    kind: FaultKind,
    items: Vec<usize>,
}

impl FaultSet {
    pub fn empty() -> Self {
        Self { kind: FaultKind::Edge, items: Vec::new() }
    }

    pub fn new(kind: FaultKind, items: impl IntoIterator<Item = usize>, g: &Graph) -> Result<Self, GraphError> {
        let mut items: Vec<usize> = items.into_iter().collect();
        items.sort_unstable();
        if let Some(w) = items.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateFault(w[0]));
        }
        let set = Self { kind, items };
        set.validate(g)?;
        Ok(set)
    }

    pub fn edges(items: impl IntoIterator<Item = EdgeId>, g: &Graph) -> Result<Self, GraphError> {
        Self::new(FaultKind::Edge, items, g)
    }

    pub fn vertices(items: impl IntoIterator<Item = Vertex>, g: &Graph) -> Result<Self, GraphError> {
        Self::new(FaultKind::Vertex, items, g)
    }

    /// Fails the edge between `u` and `v`.
    pub fn edge_between(g: &Graph, u: Vertex, v: Vertex) -> Result<Self, GraphError> {
        g.check_vertex(u)?;
        g.check_vertex(v)?;
        let id = g.edge_id(u, v).ok_or(GraphError::NoSuchEdge(u, v))?;
        Ok(Self { kind: FaultKind::Edge, items: vec![id] })
    }

    /// Sorted items without validation against any graph.
    pub(crate) fn from_sorted(kind: FaultKind, items: Vec<usize>) -> Self {
        debug_assert!(items.windows(2).all(|w| w[0] < w[1]));
        Self { kind, items }
    }

    pub fn kind(&self) -> FaultKind {
        self.kind
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn validate(&self, g: &Graph) -> Result<(), GraphError> {
        for &x in &self.items {
            match self.kind {
                FaultKind::Edge if x >= g.m() => return Err(GraphError::EdgeOutOfRange { id: x, m: g.m() }),
                FaultKind::Vertex if x >= g.n() => return Err(GraphError::VertexOutOfRange { vertex: x, n: g.n() }),
                _ => {}
            }
        }
        Ok(())
    }

    #[inline]
    pub fn blocks_edge(&self, e: EdgeId) -> bool {
        self.kind == FaultKind::Edge && self.items.contains(&e)
    }

    #[inline]
    pub fn blocks_vertex(&self, v: Vertex) -> bool {
        self.kind == FaultKind::Vertex && self.items.contains(&v)
    }

    /// Re-expresses this fault set in the id space of `sub`, a spanning
    /// subgraph of `host`. Failed edges absent from `sub` are dropped.
    pub fn project(&self, host: &Graph, sub: &Graph) -> FaultSet {
        match self.kind {
            FaultKind::Vertex => self.clone(),
            FaultKind::Edge => {
                let mut items: Vec<usize> = self
                    .items
                    .iter()
                    .filter_map(|&e| {
                        let (u, v) = host.endpoints(e);
                        sub.edge_id(u, v)
                    })
                    .collect();
                items.sort_unstable();
                FaultSet { kind: FaultKind::Edge, items }
            }
        }
    }
}

/// Adjacency sets that grow edge by edge, used by constructions that query
/// distances in a partially built spanner.
#[derive(Clone, Debug)]
pub(crate) struct GrowingGraph {
    adj: Vec<Vec<Vertex>>,
    dist: Vec<u32>,
    queue: Vec<Vertex>,
}

impl GrowingGraph {
    pub(crate) fn new(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n], dist: vec![UNREACHABLE; n], queue: Vec::new() }
    }

    pub(crate) fn add_edge(&mut self, u: Vertex, v: Vertex) {
        self.adj[u].push(v);
        self.adj[v].push(u);
    }

    /// Whether `d(u, v) <= limit` in the current graph.
    pub(crate) fn within(&mut self, u: Vertex, v: Vertex, limit: u32) -> bool {
        if u == v {
            return true;
        }
        self.queue.clear();
        self.queue.push(u);
        self.dist[u] = 0;
        let mut head = 0;
        let mut found = false;
        'outer: while head < self.queue.len() {
            let x = self.queue[head];
            head += 1;
            let dx = self.dist[x];
            if dx >= limit {
                break;
            }
            for &y in &self.adj[x] {
                if self.dist[y] == UNREACHABLE {
                    self.dist[y] = dx + 1;
                    if y == v {
                        found = true;
                        break 'outer;
                    }
                    self.queue.push(y);
                }
            }
        }
        for &x in &self.queue {
            self.dist[x] = UNREACHABLE;
        }
        self.dist[v] = UNREACHABLE;
        found
    }
}
