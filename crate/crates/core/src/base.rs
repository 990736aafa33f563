//! Non-fault-tolerant building blocks: the greedy multiplicative spanner and
//! two clustering-based additive spanners, plus the checker certifying that
//! an additive spanner is clustering-based.

use serde::{Deserialize, Serialize};

use crate::graph::{
    all_pairs_distances, BfsScratch, EdgeId, FaultSet, Graph, GrowingGraph, ShortestPathTree, Vertex, UNREACHABLE,
};
use crate::spanner::{Claim, Clustering, Spanner, SpannerError};

/// Smallest `c >= 1` with `c^den >= n^num`.
pub(crate) fn ceil_power_ratio(n: usize, num: u32, den: u32) -> usize {
    let target = (n as u128).pow(num);
    let mut c: usize = ((n as f64).powf(num as f64 / den as f64).floor() as usize).max(1);
    while c > 1 && (c as u128 - 1).pow(den) >= target {
        c -= 1;
    }
    while (c as u128).pow(den) < target {
        c += 1;
    }
    c
}

/// Edges of `candidates` kept by the greedy rule: scan in the given order and
/// keep an edge when the kept edges so far do not already connect its
/// endpoints within `stretch` hops.
pub(crate) fn greedy_over(g: &Graph, candidates: impl IntoIterator<Item = EdgeId>, stretch: u32) -> Vec<EdgeId> {
    let mut h = GrowingGraph::new(g.n());
    let mut kept = Vec::new();
    for e in candidates {
        let (u, v) = g.endpoints(e);
        if !h.within(u, v, stretch) {
            h.add_edge(u, v);
            kept.push(e);
        }
    }
    kept
}

/// Classic greedy `(2k-1)`-spanner over edges in canonical order.
pub fn greedy_multiplicative(g: &Graph, k: u32) -> Result<Spanner, SpannerError> {
    if k == 0 {
        return Err(SpannerError::InvalidParameter("k must be at least 1".into()));
    }
    let stretch = 2 * k - 1;
    let kept = greedy_over(g, 0..g.m(), stretch);
    Spanner::new(g, kept, Claim::standard(stretch, 0), format!("greedy_multiplicative(k={k})"))
}

/// Degree-threshold clustering: scanning vertices by id, an unclustered
/// vertex with at least `delta` unclustered neighbors becomes a center and
/// absorbs all of them. Unclustered degrees only shrink, so one ascending
/// scan picks the lowest-id qualifying vertex at every step.
pub(crate) fn threshold_clustering(g: &Graph, delta: usize) -> Clustering {
    let n = g.n();
    let mut cluster_of: Vec<Option<usize>> = vec![None; n];
    let mut free_degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut centers = Vec::new();
    let absorb = |v: Vertex, id: usize, cluster_of: &mut Vec<Option<usize>>, free_degree: &mut Vec<usize>| {
        cluster_of[v] = Some(id);
        for &w in g.neighbors(v) {
            free_degree[w] -= 1;
        }
    };
    for v in 0..n {
        if cluster_of[v].is_some() || free_degree[v] < delta {
            continue;
        }
        let id = centers.len();
        centers.push(v);
        let members: Vec<Vertex> = g.neighbors(v).iter().copied().filter(|&w| cluster_of[w].is_none()).collect();
        absorb(v, id, &mut cluster_of, &mut free_degree);
        for w in members {
            absorb(w, id, &mut cluster_of, &mut free_degree);
        }
    }
    Clustering::new(cluster_of, centers).expect("threshold clustering is well formed")
}

/// Edges every clustering-based spanner contains: all edges touching an
/// unclustered vertex, and every member's edge to its center.
fn clustering_skeleton(g: &Graph, c: &Clustering) -> Vec<bool> {
    let mut mask = vec![false; g.m()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let star = c.center(u) == Some(v) || c.center(v) == Some(u);
        if !c.is_clustered(u) || !c.is_clustered(v) || star {
            mask[e] = true;
        }
    }
    mask
}

fn mark_path(g: &Graph, mask: &mut [bool], path: &[Vertex]) -> usize {
    let mut added = 0;
    for w in path.windows(2) {
        let e = g.edge_id(w[0], w[1]).expect("path follows graph edges");
        if !mask[e] {
            mask[e] = true;
            added += 1;
        }
    }
    added
}

/// 2-additive spanner: threshold `ceil(sqrt n)` clustering, all edges at
/// unclustered vertices, center stars, and one canonical BFS tree of the
/// host per center.
pub fn acim_2additive(g: &Graph) -> Result<(Spanner, Clustering), SpannerError> {
    let delta = ceil_power_ratio(g.n().max(1), 1, 2);
    let clustering = threshold_clustering(g, delta);
    let mut mask = clustering_skeleton(g, &clustering);
    let mut scratch = BfsScratch::new();
    for &c in clustering.centers() {
        let tree = ShortestPathTree::build(g, c, &mut scratch, |_| true, |_| true);
        for (p, v) in tree.tree_edges() {
            mask[g.edge_id(p, v).expect("tree edge")] = true;
        }
    }
    let spanner = Spanner::from_mask(
        g,
        &mask,
        Claim::standard(1, 2),
        format!("acim_2additive(delta={delta},clusters={})", clustering.num_clusters()),
    )?;
    Ok((spanner, clustering))
}

/// Counters from a 6-additive construction run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathBuyingStats {
    pub delta: usize,
    pub clusters: usize,
    pub paths_considered: usize,
    pub paths_bought: usize,
    /// Center pairs still farther than `d_G + 2` after path buying, whose
    /// canonical path was then added outright.
    pub closure_paths: usize,
}

/// Distances from a cluster (as a multi-source BFS) in the current spanner.
fn cluster_distances(g: &Graph, mask: &[bool], members: &[Vertex]) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; g.n()];
    let mut queue: Vec<Vertex> = members.to_vec();
    for &v in members {
        dist[v] = 0;
    }
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        for (y, e) in g.arcs(x) {
            if mask[e] && dist[y] == UNREACHABLE {
                dist[y] = dist[x] + 1;
                queue.push(y);
            }
        }
    }
    dist
}

/// 6-additive spanner by clustering plus path buying.
pub fn bkmp_6additive(g: &Graph) -> Result<(Spanner, Clustering), SpannerError> {
    bkmp_6additive_with_stats(g).map(|(s, c, _)| (s, c))
}

/// [`bkmp_6additive`] with its path-buying counters.
///
/// Clusters come from threshold `ceil(n^(1/3))`. Then, for every pair of
/// centers in increasing order, the canonical host path between them is
/// bought iff its cost (edges not yet present) is at most twice its value
/// (cluster pairs touched by the path whose current spanner distance the
/// path would shorten). A final pass adds the canonical path for any center
/// pair whose spanner distance still exceeds its host distance by more than
/// two, which makes the `+6` bound and the clustering property hold
/// unconditionally.
pub fn bkmp_6additive_with_stats(g: &Graph) -> Result<(Spanner, Clustering, PathBuyingStats), SpannerError> {
    let n = g.n();
    let delta = ceil_power_ratio(n.max(1), 1, 3);
    let clustering = threshold_clustering(g, delta);
    let mut mask = clustering_skeleton(g, &clustering);
    let members = clustering.members();
    let centers = clustering.centers().to_vec();
    let k = centers.len();
    let mut stats = PathBuyingStats { delta, clusters: k, ..Default::default() };

    let mut scratch = BfsScratch::new();
    let trees: Vec<ShortestPathTree> =
        centers.iter().map(|&c| ShortestPathTree::build(g, c, &mut scratch, |_| true, |_| true)).collect();

    let mut from_cluster: Vec<Option<Vec<u32>>> = vec![None; k];
    for (i, tree) in trees.iter().enumerate() {
        for &other in &centers[i + 1..] {
            let Some(path) = tree.path_to(other) else { continue };
            stats.paths_considered += 1;
            let cost = path.windows(2).filter(|w| !mask[g.edge_id(w[0], w[1]).expect("path edge")]).count();
            if cost == 0 {
                continue;
            }
            let mut touching: Vec<(usize, Vec<usize>)> = Vec::new();
            for (pos, &v) in path.iter().enumerate() {
                if let Some(c) = clustering.cluster_of(v) {
                    match touching.iter_mut().find(|(id, _)| *id == c) {
                        Some((_, positions)) => positions.push(pos),
                        None => touching.push((c, vec![pos])),
                    }
                }
            }
            let mut value = 0usize;
            for a in 0..touching.len() {
                let (ca, ref pa) = touching[a];
                let da = from_cluster[ca].get_or_insert_with(|| cluster_distances(g, &mask, &members[ca])).clone();
                for (cb, pb) in &touching[a + 1..] {
                    let along_path = pa
                        .iter()
                        .flat_map(|&x| pb.iter().map(move |&y| x.abs_diff(y)))
                        .min()
                        .expect("non-empty position lists") as u32;
                    let current = members[*cb].iter().map(|&v| da[v]).min().unwrap_or(UNREACHABLE);
                    if along_path < current {
                        value += 1;
                    }
                }
            }
            if cost <= 2 * value {
                mark_path(g, &mut mask, &path);
                stats.paths_bought += 1;
                from_cluster.iter_mut().for_each(|d| *d = None);
            }
        }
    }

    for i in 0..k {
        let mut here = BfsScratch::new();
        let mut dist = here.run_filtered(g, centers[i], |e| mask[e], |_| true).to_vec();
        for j in i + 1..k {
            let dg = trees[i].dist[centers[j]];
            if dg == UNREACHABLE || dist[centers[j]] <= dg + 2 {
                continue;
            }
            let path = trees[i].path_to(centers[j]).expect("reachable in host");
            mark_path(g, &mut mask, &path);
            stats.closure_paths += 1;
            dist = here.run_filtered(g, centers[i], |e| mask[e], |_| true).to_vec();
        }
    }

    let spanner =
        Spanner::from_mask(g, &mask, Claim::standard(1, 6), format!("bkmp_6additive(delta={delta},clusters={k})"))?;
    Ok((spanner, clustering, stats))
}

/// Outcome of [`check_clustering_property`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusteringCheck {
    pub pass: bool,
    pub pairs_checked: u64,
    /// First violating `(u, v)` in increasing `(u, v)` order.
    pub witness: Option<(Vertex, Vertex)>,
}

/// The path property for one pair `(u, v)` with `v` clustered, in its
/// distance form: a path ending with the edge `(cnt(v), v)` of length `L`
/// exists iff `d_A(u, cnt(v)) + 1 <= L`.
fn pair_has_path(dg: u32, da_uv: u32, da_uc: u32, v_is_center: bool, center_edge: bool, beta: i64) -> bool {
    if dg == UNREACHABLE {
        return true;
    }
    let dg = dg as i64;
    let fin = |d: u32| (d != UNREACHABLE).then_some(d as i64);
    if fin(da_uv).is_some_and(|d| d <= dg + beta - 2) {
        return true;
    }
    if v_is_center {
        return fin(da_uv).is_some_and(|d| d < dg + beta);
    }
    center_edge && fin(da_uc).is_some_and(|d| d < dg + beta)
}

/// Certifies that `a` satisfies the clustering path property with additive
/// term `beta` for clustering `c`: for every vertex `u` and clustered
/// `v != u`, either `d_A(u,v) <= d_G(u,v) + beta - 2`, or `v` is its own
/// center and `d_A(u,v) <= d_G(u,v) + beta - 1`, or the edge `(cnt(v), v)`
/// is in `a` and `d_A(u, cnt(v)) + 1 <= d_G(u,v) + beta`.
pub fn check_clustering_property(
    g: &Graph,
    a: &Spanner,
    c: &Clustering,
    beta: u32,
) -> Result<ClusteringCheck, SpannerError> {
    c.validate(g)?;
    a.check_host(g)?;
    let empty = FaultSet::empty();
    let dg = all_pairs_distances(g, &empty)?;
    let da = all_pairs_distances(a.graph(), &empty)?;
    let mut checked = 0u64;
    for u in 0..g.n() {
        for v in 0..g.n() {
            let Some(center) = c.center(v) else { continue };
            if u == v {
                continue;
            }
            checked += 1;
            let ok = pair_has_path(
                dg.get(u, v),
                da.get(u, v),
                da.get(u, center),
                center == v,
                a.graph().has_edge(center, v),
                beta as i64,
            );
            if !ok {
                return Ok(ClusteringCheck { pass: false, pairs_checked: checked, witness: Some((u, v)) });
            }
        }
    }
    Ok(ClusteringCheck { pass: true, pairs_checked: checked, witness: None })
}

/// Checks the structural half of being clustering-based: `a` holds every
/// edge at an unclustered vertex and every member-to-center edge.
pub fn check_clustering_structure(g: &Graph, a: &Spanner, c: &Clustering) -> Result<(), SpannerError> {
    c.validate(g)?;
    a.check_host(g)?;
    let skeleton = clustering_skeleton(g, c);
    match skeleton.iter().enumerate().find(|&(e, &need)| need && !a.contains(e)) {
        Some((e, _)) => {
            Err(SpannerError::InvalidClustering(format!("required edge {:?} missing from spanner", g.endpoints(e))))
        }
        None => Ok(()),
    }
}
