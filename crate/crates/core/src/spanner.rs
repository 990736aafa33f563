//! Spanner and clustering types shared by every construction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, FaultKind, Graph, GraphError, Vertex};

#[derive(Debug, Error)]
pub enum SpannerError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("spanner was built over a different host graph")]
    HostMismatch,
    #[error("edge id {0} is not an edge of the host graph")]
    NotSubgraph(EdgeId),
    #[error("inconsistent clustering: {0}")]
    InvalidClustering(String),
    #[error("base spanner is not clustering-based with beta={beta}: pair ({u}, {v}) violates the path property")]
    ClusteringPropertyFailed { beta: u32, u: Vertex, v: Vertex },
    #[error("unsupported claim: {0}")]
    Claim(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Which failures a claim covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimKind {
    None,
    Edge,
    Vertex,
}

impl ClaimKind {
    pub fn fault_kind(self) -> Option<FaultKind> {
        match self {
            ClaimKind::None => None,
            ClaimKind::Edge => Some(FaultKind::Edge),
            ClaimKind::Vertex => Some(FaultKind::Vertex),
        }
    }
}

impl From<FaultKind> for ClaimKind {
    fn from(kind: FaultKind) -> Self {
        match kind {
            FaultKind::Edge => ClaimKind::Edge,
            FaultKind::Vertex => ClaimKind::Vertex,
        }
    }
}

/// The guarantee `d_{H-F}(s,t) <= alpha * d_{G-F}(s,t) + beta` for every
/// fault set `F` of at most `f` components of the given kind. When
/// `sources` is set the guarantee only covers pairs with an endpoint there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub alpha: u32,
    pub beta: u32,
    pub f: u32,
    pub kind: ClaimKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<Vertex>>,
}

impl Claim {
    pub fn new(alpha: u32, beta: u32, f: u32, kind: ClaimKind) -> Self {
        Self { alpha, beta, f, kind, sources: None }
    }

    /// A non-fault-tolerant `(alpha, beta)` claim.
    pub fn standard(alpha: u32, beta: u32) -> Self {
        Self::new(alpha, beta, 0, ClaimKind::None)
    }

    /// Restricts the claim to `sources`, stored sorted and deduplicated.
    pub fn with_sources(mut self, mut sources: Vec<Vertex>) -> Self {
        sources.sort_unstable();
        sources.dedup();
        self.sources = Some(sources);
        self
    }

    /// Fault budget actually enumerated by verification.
    pub fn fault_budget(&self) -> usize {
        match self.kind {
            ClaimKind::None => 0,
            _ => self.f as usize,
        }
    }
}

/// A spanning subgraph of a host graph together with the guarantee it was
/// built to satisfy. The claim is fixed at construction.
#[derive(Clone, Debug)]
pub struct Spanner {
    host_hash: String,
    edges: Vec<EdgeId>,
    claim: Claim,
    provenance: String,
    graph: Graph,
}

#[derive(Serialize, Deserialize)]
struct SpannerDocument {
    host_hash: String,
    n: usize,
    edges: Vec<EdgeId>,
    claim: Claim,
    provenance: String,
}

impl Spanner {
    pub fn new(
        host: &Graph,
        edges: impl IntoIterator<Item = EdgeId>,
        claim: Claim,
        provenance: impl Into<String>,
    ) -> Result<Self, SpannerError> {
        let mut edges: Vec<EdgeId> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        if let Some(&bad) = edges.iter().find(|&&e| e >= host.m()) {
            return Err(SpannerError::NotSubgraph(bad));
        }
        let graph = host.edge_subgraph(&edges)?;
        Ok(Self { host_hash: host.fingerprint(), edges, claim, provenance: provenance.into(), graph })
    }

    /// Builds from a membership mask over host edge ids.
    pub(crate) fn from_mask(
        host: &Graph,
        mask: &[bool],
        claim: Claim,
        provenance: impl Into<String>,
    ) -> Result<Self, SpannerError> {
        Self::new(host, mask.iter().enumerate().filter(|(_, &k)| k).map(|(e, _)| e), claim, provenance)
    }

    /// Sorted host edge ids.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn claim(&self) -> &Claim {
        &self.claim
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn host_hash(&self) -> &str {
        &self.host_hash
    }

    /// The spanner as a standalone graph on the host's vertex set. Its edge
    /// ids are local; use [`crate::graph::FaultSet::project`] to map faults.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// Membership mask over host edge ids.
    pub fn mask(&self, host: &Graph) -> Vec<bool> {
        let mut mask = vec![false; host.m()];
        for &e in &self.edges {
            mask[e] = true;
        }
        mask
    }

    pub fn check_host(&self, host: &Graph) -> Result<(), SpannerError> {
        if self.graph.n() != host.n() || self.edges.last().is_some_and(|&e| e >= host.m()) {
            return Err(SpannerError::HostMismatch);
        }
        if self.edges.iter().any(|&e| {
            let (u, v) = host.endpoints(e);
            !self.graph.has_edge(u, v)
        }) {
            return Err(SpannerError::HostMismatch);
        }
        Ok(())
    }

    /// JSON document with keys in a fixed order: host hash, vertex count,
    /// sorted edge ids, claim, provenance.
    pub fn to_json(&self) -> String {
        let doc = SpannerDocument {
            host_hash: self.host_hash.clone(),
            n: self.graph.n(),
            edges: self.edges.clone(),
            claim: self.claim.clone(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("spanner document serializes")
    }

    pub fn from_json(text: &str, host: &Graph) -> Result<Self, SpannerError> {
        let doc: SpannerDocument = serde_json::from_str(text)?;
        if doc.host_hash != host.fingerprint() || doc.n != host.n() {
            return Err(SpannerError::HostMismatch);
        }
        Self::new(host, doc.edges, doc.claim, doc.provenance)
    }
}

/// A partition of a subset of the vertices into clusters, each with a
/// designated center.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    cluster_of: Vec<Option<usize>>,
    centers: Vec<Vertex>,
}

impl Clustering {
    /// A clustering of `n` vertices with no clusters.
    pub fn empty(n: usize) -> Self {
        Self { cluster_of: vec![None; n], centers: Vec::new() }
    }

    pub fn new(cluster_of: Vec<Option<usize>>, centers: Vec<Vertex>) -> Result<Self, SpannerError> {
        let c = Self { cluster_of, centers };
        c.check_shape()?;
        Ok(c)
    }

    /// Builds from explicit member lists; the first member is the center.
    pub fn from_clusters(n: usize, clusters: &[Vec<Vertex>]) -> Result<Self, SpannerError> {
        let mut cluster_of = vec![None; n];
        let mut centers = Vec::with_capacity(clusters.len());
        for (id, members) in clusters.iter().enumerate() {
            let &center =
                members.first().ok_or_else(|| SpannerError::InvalidClustering(format!("cluster {id} is empty")))?;
            centers.push(center);
            for &v in members {
                if v >= n {
                    return Err(SpannerError::InvalidClustering(format!("vertex {v} out of range")));
                }
                if cluster_of[v].replace(id).is_some() {
                    return Err(SpannerError::InvalidClustering(format!("vertex {v} is in two clusters")));
                }
            }
        }
        Self::new(cluster_of, centers)
    }

    fn check_shape(&self) -> Result<(), SpannerError> {
        let mut sizes = vec![0usize; self.centers.len()];
        for (v, c) in self.cluster_of.iter().enumerate() {
            if let Some(c) = *c {
                if c >= self.centers.len() {
                    return Err(SpannerError::InvalidClustering(format!("vertex {v} has unknown cluster {c}")));
                }
                sizes[c] += 1;
            }
        }
        for (c, &center) in self.centers.iter().enumerate() {
            if center >= self.cluster_of.len() || self.cluster_of[center] != Some(c) {
                return Err(SpannerError::InvalidClustering(format!("center of cluster {c} lies outside it")));
            }
            if sizes[c] == 0 {
                return Err(SpannerError::InvalidClustering(format!("cluster {c} is empty")));
            }
        }
        Ok(())
    }

    /// Checks the clustering against a host graph: matching vertex count,
    /// and every member adjacent to (or equal to) its center.
    pub fn validate(&self, g: &Graph) -> Result<(), SpannerError> {
        if self.cluster_of.len() != g.n() {
            return Err(SpannerError::InvalidClustering(format!(
                "clustering covers {} vertices, graph has {}",
                self.cluster_of.len(),
                g.n()
            )));
        }
        self.check_shape()?;
        for v in 0..g.n() {
            if let Some(c) = self.center(v) {
                if c != v && !g.has_edge(c, v) {
                    return Err(SpannerError::InvalidClustering(format!(
                        "vertex {v} is not adjacent to its center {c}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.centers.len()
    }

    pub fn cluster_of(&self, v: Vertex) -> Option<usize> {
        self.cluster_of[v]
    }

    /// Center of the cluster containing `v`, if `v` is clustered.
    pub fn center(&self, v: Vertex) -> Option<Vertex> {
        self.cluster_of[v].map(|c| self.centers[c])
    }

    pub fn centers(&self) -> &[Vertex] {
        &self.centers
    }

    pub fn is_clustered(&self, v: Vertex) -> bool {
        self.cluster_of[v].is_some()
    }

    /// Members of every cluster in increasing vertex order.
    pub fn members(&self) -> Vec<Vec<Vertex>> {
        let mut out = vec![Vec::new(); self.centers.len()];
        for (v, c) in self.cluster_of.iter().enumerate() {
            if let Some(c) = *c {
                out[c].push(v);
            }
        }
        out
    }
}
