//! Single-edge-fault additive spanners from a clustering-based additive
//! spanner, a multiplicative EFT spanner, and a few extra edges per vertex
//! and per pair of clusters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::base::check_clustering_property;
use crate::graph::{canonical_shortest_path, BfsScratch, EdgeId, FaultSet, Graph, Vertex, UNREACHABLE};
use crate::spanner::{Claim, ClaimKind, Clustering, Spanner, SpannerError};

/// Edges chosen between two distinct clusters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterChoice {
    pub clusters: (usize, usize),
    /// One or two host edge ids, increasing.
    pub edges: Vec<EdgeId>,
    /// Whether the two chosen edges share no endpoint.
    pub disjoint: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAugmentEdges {
    /// Per vertex: its first edge, in neighbor order, to a member of its own
    /// cluster other than its center.
    pub intra: Vec<Option<EdgeId>>,
    /// Per connected cluster pair, in increasing pair order.
    pub inter: Vec<InterChoice>,
}

impl ClusterAugmentEdges {
    /// All chosen edges, sorted and deduplicated.
    pub fn edges(&self) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = self.intra.iter().flatten().copied().collect();
        out.extend(self.inter.iter().flat_map(|c| c.edges.iter().copied()));
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Chooses from the edges between two clusters (sorted by id, hence
/// lexicographically): the smallest vertex-disjoint pair if one exists,
/// otherwise the first two edges, otherwise the only edge.
fn choose_inter(g: &Graph, delta: &[EdgeId]) -> (Vec<EdgeId>, bool) {
    for (i, &e) in delta.iter().enumerate() {
        let (a, b) = g.endpoints(e);
        if let Some(&f) = delta[i + 1..].iter().find(|&&f| {
            let (c, d) = g.endpoints(f);
            a != c && a != d && b != c && b != d
        }) {
            return (vec![e, f], true);
        }
    }
    (delta.iter().take(2).copied().collect(), false)
}

pub fn augment_clusters(g: &Graph, c: &Clustering) -> Result<ClusterAugmentEdges, SpannerError> {
    c.validate(g)?;
    let intra = (0..g.n())
        .map(|v| {
            let cid = c.cluster_of(v)?;
            let center = c.center(v)?;
            g.arcs(v).find(|&(x, _)| x != center && c.cluster_of(x) == Some(cid)).map(|(_, e)| e)
        })
        .collect();
    let mut between: BTreeMap<(usize, usize), Vec<EdgeId>> = BTreeMap::new();
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if let (Some(a), Some(b)) = (c.cluster_of(u), c.cluster_of(v)) {
            if a != b {
                between.entry((a.min(b), a.max(b))).or_default().push(e);
            }
        }
    }
    let inter = between
        .into_iter()
        .map(|(clusters, delta)| {
            let (edges, disjoint) = choose_inter(g, &delta);
            InterChoice { clusters, edges, disjoint }
        })
        .collect();
    Ok(ClusterAugmentEdges { intra, inter })
}

/// Additive stretch `2 beta + max(2, alpha - 3)` of the combined spanner.
pub fn alg2_stretch(alpha: u32, beta: u32) -> u32 {
    2 * beta + 2u32.max(alpha.saturating_sub(3))
}

/// `H = A + M + E'` with a single-edge-fault additive claim. `a` must be
/// additive and pass the clustering path property for `c` with its own
/// additive term; `m` must be a multiplicative EFT spanner.
pub fn build_alg2_spanner(g: &Graph, a: &Spanner, c: &Clustering, m: &Spanner) -> Result<Spanner, SpannerError> {
    a.check_host(g)?;
    m.check_host(g)?;
    let ac = a.claim();
    if ac.alpha != 1 || ac.kind != ClaimKind::None {
        return Err(SpannerError::Claim(format!("base spanner must be purely additive, got {ac:?}")));
    }
    let mc = m.claim();
    if mc.beta != 0 || mc.kind != ClaimKind::Edge || mc.f < 1 || mc.sources.is_some() {
        return Err(SpannerError::Claim(format!(
            "second spanner must be multiplicative and tolerate an edge fault, got {mc:?}"
        )));
    }
    let check = check_clustering_property(g, a, c, ac.beta)?;
    if let Some((u, v)) = check.witness {
        return Err(SpannerError::ClusteringPropertyFailed { beta: ac.beta, u, v });
    }
    let extra = augment_clusters(g, c)?;
    let mut mask = a.mask(g);
    for &e in m.edges().iter().chain(&extra.edges()) {
        mask[e] = true;
    }
    let beta = alg2_stretch(mc.alpha, ac.beta);
    Spanner::from_mask(
        g,
        &mask,
        Claim::new(1, beta, 1, ClaimKind::Edge),
        format!("alg2(base={},mult={})", a.provenance(), m.provenance()),
    )
}

/// Whether some shortest `a`-`b` path uses the edge `(x, y)`, given the
/// distances `d(a,b)`, `d(a,x)`, `d(a,y)`, `d(b,x)` and `d(b,y)`.
pub fn shortest_path_uses_edge(d_ab: u32, a_x: u32, a_y: u32, b_x: u32, b_y: u32) -> bool {
    if d_ab == UNREACHABLE {
        return false;
    }
    let via = |p: u32, q: u32| {
        if p == UNREACHABLE || q == UNREACHABLE {
            u64::MAX
        } else {
            p as u64 + 1 + q as u64
        }
    };
    via(a_x, b_y).min(via(a_y, b_x)) == d_ab as u64
}

/// Splits the canonical replacement path `pi_{G-e}(s, t)` at consecutive
/// vertices `(z, z')` such that no shortest `s`-`z` path and no shortest
/// `z'`-`t` path in `a` uses `e`. Requires `e` to lie on every shortest
/// `s`-`t` path of `a` while `a - e` still connects them. `z` is the last
/// vertex of the path having a shortest path to `t` in `a` through `e`.
pub fn find_block_split(
    g: &Graph,
    a: &Spanner,
    e: EdgeId,
    s: Vertex,
    t: Vertex,
) -> Result<(Vertex, Vertex), SpannerError> {
    a.check_host(g)?;
    g.check_vertex(s)?;
    g.check_vertex(t)?;
    if e >= g.m() {
        return Err(crate::graph::GraphError::EdgeOutOfRange { id: e, m: g.m() }.into());
    }
    let (x, y) = g.endpoints(e);
    let ag = a.graph();
    let Some(local) = ag.edge_id(x, y) else {
        return Err(SpannerError::Precondition(format!("edge ({x}, {y}) is not in the spanner")));
    };
    let mut scratch = BfsScratch::new();
    let from_t = scratch.run_filtered(ag, t, |_| true, |_| true).to_vec();
    let without = scratch.run_filtered(ag, s, |f| f != local, |_| true)[t];
    if from_t[s] == UNREACHABLE || without == UNREACHABLE || from_t[s] >= without {
        return Err(SpannerError::Precondition(format!(
            "edge ({x}, {y}) must lie on every shortest {s}-{t} path of the spanner without disconnecting them"
        )));
    }
    let from_x = scratch.run_filtered(ag, x, |_| true, |_| true).to_vec();
    let from_y = scratch.run_filtered(ag, y, |_| true, |_| true).to_vec();
    let pi = canonical_shortest_path(g, s, t, &FaultSet::from_sorted(crate::graph::FaultKind::Edge, vec![e]))?;
    let uses = |v: Vertex| shortest_path_uses_edge(from_t[v], from_x[v], from_y[v], from_x[t], from_y[t]);
    let last = pi.iter().rposition(|&v| uses(v)).expect("the source reaches t through the edge");
    Ok((pi[last], pi[last + 1]))
}
