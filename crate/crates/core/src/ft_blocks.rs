//! Fault-tolerant building blocks: the round-based multiplicative EFT
//! spanner, single-fault sourcewise preservers, and sourcewise augmentation
//! of an arbitrary `(alpha, beta)` spanner.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base::{acim_2additive, greedy_over};
use crate::graph::{BfsScratch, EdgeId, FaultKind, Graph, ShortestPathTree, Vertex, UNREACHABLE};
use crate::spanner::{Claim, ClaimKind, Spanner, SpannerError};

/// `(2k-1)`-multiplicative `f`-EFT spanner built from `f + 1` edge-disjoint
/// greedy rounds. Also returns the edges of each round.
pub fn eft_multiplicative_rounds(g: &Graph, k: u32, f: u32) -> Result<(Spanner, Vec<Vec<EdgeId>>), SpannerError> {
    if k == 0 || f == 0 {
        return Err(SpannerError::InvalidParameter(format!("need k >= 1 and f >= 1, got k={k} f={f}")));
    }
    let stretch = 2 * k - 1;
    let mut taken = vec![false; g.m()];
    let mut rounds = Vec::with_capacity(f as usize + 1);
    for _ in 0..=f {
        let round = greedy_over(g, (0..g.m()).filter(|&e| !taken[e]), stretch);
        for &e in &round {
            taken[e] = true;
        }
        rounds.push(round);
    }
    let spanner = Spanner::from_mask(
        g,
        &taken,
        Claim::new(stretch, 0, f, ClaimKind::Edge),
        format!("eft_multiplicative(k={k},f={f})"),
    )?;
    Ok((spanner, rounds))
}

pub fn eft_multiplicative(g: &Graph, k: u32, f: u32) -> Result<Spanner, SpannerError> {
    eft_multiplicative_rounds(g, k, f).map(|(s, _)| s)
}

fn check_sources(g: &Graph, sources: &[Vertex]) -> Result<Vec<Vertex>, SpannerError> {
    let mut s = sources.to_vec();
    s.sort_unstable();
    s.dedup();
    for &v in &s {
        g.check_vertex(v)?;
    }
    Ok(s)
}

/// A single failed component, or none.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fault {
    None,
    Edge(EdgeId),
    Vertex(Vertex),
}

impl Fault {
    fn of(kind: FaultKind, x: usize) -> Self {
        match kind {
            FaultKind::Edge => Fault::Edge(x),
            FaultKind::Vertex => Fault::Vertex(x),
        }
    }

    fn edge_ok(self, e: EdgeId) -> bool {
        self != Fault::Edge(e)
    }

    fn vertex_ok(self, v: Vertex) -> bool {
        self != Fault::Vertex(v)
    }
}

/// Exact single-fault sourcewise preserver. For each source the canonical
/// BFS tree is kept, and for each tree component whose failure can change
/// the tree, the new parent edge of every vertex whose distance or parent
/// changes in the canonical tree of `g - x`. The union therefore contains a
/// full shortest-path tree of `g - x` for every source and fault.
pub fn sourcewise_ft_preserver(g: &Graph, sources: &[Vertex], kind: FaultKind) -> Result<Spanner, SpannerError> {
    let sources = check_sources(g, sources)?;
    let per_source: Vec<Vec<EdgeId>> =
        sources.par_iter().map_init(BfsScratch::new, |scratch, &s| preserver_edges(g, s, kind, scratch)).collect();
    let mut mask = vec![false; g.m()];
    for e in per_source.into_iter().flatten() {
        mask[e] = true;
    }
    Spanner::from_mask(
        g,
        &mask,
        Claim::new(1, 0, 1, kind.into()).with_sources(sources.clone()),
        format!("sourcewise_ft_preserver(kind={kind},sources={})", sources.len()),
    )
}

fn preserver_edges(g: &Graph, s: Vertex, kind: FaultKind, scratch: &mut BfsScratch) -> Vec<EdgeId> {
    let tree = ShortestPathTree::build(g, s, scratch, |_| true, |_| true);
    let parent_edge = |t: &ShortestPathTree, v: Vertex| t.parent[v].map(|p| g.edge_id(p, v).expect("tree edge"));
    let mut edges: Vec<EdgeId> = (0..g.n()).filter_map(|v| parent_edge(&tree, v)).collect();
    let candidates: Vec<Fault> = match kind {
        FaultKind::Edge => edges.iter().map(|&e| Fault::Edge(e)).collect(),
        FaultKind::Vertex => {
            // Failing a leaf leaves the rest of the tree intact.
            let mut internal = vec![false; g.n()];
            for (p, _) in tree.tree_edges() {
                internal[p] = true;
            }
            (0..g.n()).filter(|&v| v != s && internal[v]).map(Fault::Vertex).collect()
        }
    };
    for x in candidates {
        let repl = ShortestPathTree::build(g, s, scratch, |e| x.edge_ok(e), |v| x.vertex_ok(v));
        for v in 0..g.n() {
            if repl.dist[v] != UNREACHABLE && (repl.dist[v] != tree.dist[v] || repl.parent[v] != tree.parent[v]) {
                edges.extend(parent_edge(&repl, v));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Counters from [`sourcewise_ft_augment`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentStats {
    /// Edges added while repairing each source, in source order.
    pub added_per_source: Vec<usize>,
    pub faults_examined: usize,
    pub passes: usize,
}

/// Makes `a` an `(alpha, beta)` single-fault sourcewise spanner for
/// `sources` by iterative repair: every fault found to violate the bound
/// for some target buys the canonical replacement path to that target.
///
/// Only faults that are the sole predecessor of some vertex in the current
/// BFS DAG from the source are examined; any other fault leaves
/// `d_H(s, .)` unchanged, and the fault-free bound (also enforced here)
/// then covers it because distances in `g - x` never shrink.
pub fn sourcewise_ft_augment(
    g: &Graph,
    a: &Spanner,
    sources: &[Vertex],
    kind: FaultKind,
) -> Result<(Spanner, AugmentStats), SpannerError> {
    a.check_host(g)?;
    let sources = check_sources(g, sources)?;
    let alpha = a.claim().alpha as u64;
    let beta = a.claim().beta as u64;
    let mut mask = a.mask(g);
    let mut stats = AugmentStats::default();
    let mut scratch = BfsScratch::new();
    let mut h_scratch = BfsScratch::new();
    for &s in &sources {
        let mut added = 0;
        loop {
            stats.passes += 1;
            let before = added;
            let dh: Vec<u32> = h_scratch.run_filtered(g, s, |e| mask[e], |_| true).to_vec();
            let mut faults = vec![Fault::None];
            faults.extend(critical_components(g, &dh, |e| mask[e], kind).into_iter().map(|x| Fault::of(kind, x)));
            for x in faults {
                stats.faults_examined += 1;
                let repl = ShortestPathTree::build(g, s, &mut scratch, |e| x.edge_ok(e), |v| x.vertex_ok(v));
                let mut order: Vec<Vertex> = (0..g.n()).filter(|&t| t != s && repl.dist[t] != UNREACHABLE).collect();
                order.sort_by_key(|&t| (repl.dist[t], t));
                h_scratch.run_filtered(g, s, |e| mask[e] && x.edge_ok(e), |v| x.vertex_ok(v));
                for t in order {
                    let bound = alpha * repl.dist[t] as u64 + beta;
                    let got = h_scratch.dist[t];
                    if got != UNREACHABLE && got as u64 <= bound {
                        continue;
                    }
                    let path = repl.path_to(t).expect("reachable");
                    for w in path.windows(2) {
                        let e = g.edge_id(w[0], w[1]).expect("path edge");
                        if !mask[e] {
                            mask[e] = true;
                            added += 1;
                        }
                    }
                    h_scratch.run_filtered(g, s, |e| mask[e] && x.edge_ok(e), |v| x.vertex_ok(v));
                }
            }
            if added == before {
                break;
            }
        }
        stats.added_per_source.push(added);
    }
    let claim = Claim::new(a.claim().alpha, a.claim().beta, 1, kind.into()).with_sources(sources.clone());
    let spanner = Spanner::from_mask(
        g,
        &mask,
        claim,
        format!("sourcewise_ft_augment(base={},kind={kind},sources={})", a.provenance(), sources.len()),
    )?;
    Ok((spanner, stats))
}

/// Components (edges or non-source vertices) that are the only predecessor
/// of some vertex in the BFS DAG described by `dist`.
fn critical_components(g: &Graph, dist: &[u32], in_h: impl Fn(EdgeId) -> bool, kind: FaultKind) -> Vec<usize> {
    let mut out = Vec::new();
    for v in 0..g.n() {
        if dist[v] == UNREACHABLE || dist[v] == 0 {
            continue;
        }
        let mut preds = g.arcs(v).filter(|&(w, e)| in_h(e) && dist[w] != UNREACHABLE && dist[w] + 1 == dist[v]);
        let first = preds.next();
        if let (Some((w, e)), None) = (first, preds.next()) {
            match kind {
                FaultKind::Edge => out.push(e),
                FaultKind::Vertex if dist[w] > 0 => out.push(w),
                FaultKind::Vertex => {}
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactoryKind {
    /// Exact sourcewise preserver (additive term 0).
    Preserver,
    /// A 2-additive spanner augmented to tolerate one fault from the sources.
    Augmented2Additive,
}

impl FactoryKind {
    pub fn beta(self) -> u32 {
        match self {
            FactoryKind::Preserver => 0,
            FactoryKind::Augmented2Additive => 2,
        }
    }
}

impl std::fmt::Display for FactoryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FactoryKind::Preserver => "preserver",
            FactoryKind::Augmented2Additive => "augmented_2additive",
        })
    }
}

/// One observed size of a sourcewise structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaSample {
    pub n: usize,
    pub sources: usize,
    pub edges: usize,
}

/// Builds single-fault sourcewise spanners and records their sizes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcewiseFactory {
    pub kind: FactoryKind,
    pub fault_kind: FaultKind,
    pub size_gamma: Vec<GammaSample>,
}

impl SourcewiseFactory {
    pub fn new(kind: FactoryKind, fault_kind: FaultKind) -> Self {
        Self { kind, fault_kind, size_gamma: Vec::new() }
    }

    pub fn beta(&self) -> u32 {
        self.kind.beta()
    }

    /// Largest fault budget the produced structures tolerate.
    pub fn fault_budget(&self) -> u32 {
        1
    }

    pub fn build(&mut self, g: &Graph, sources: &[Vertex]) -> Result<Spanner, SpannerError> {
        let spanner = match self.kind {
            FactoryKind::Preserver => sourcewise_ft_preserver(g, sources, self.fault_kind)?,
            FactoryKind::Augmented2Additive => {
                let (base, _) = acim_2additive(g)?;
                sourcewise_ft_augment(g, &base, sources, self.fault_kind)?.0
            }
        };
        self.size_gamma.push(GammaSample { n: g.n(), sources: sources.len(), edges: spanner.size() });
        Ok(spanner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};
    use crate::graph::fixtures::*;
    use crate::graph::{all_pairs_distances, FaultSet};

    /// Worst `d_{H-x}(s,t) - alpha * d_{G-x}(s,t)` over every single fault
    /// and every source; `None` when `H - x` disconnects a pair `G - x` keeps.
    fn worst_residue(g: &Graph, h: &Spanner, sources: &[Vertex], kind: FaultKind, alpha: i64) -> Option<i64> {
        let count = match kind {
            FaultKind::Edge => g.m(),
            FaultKind::Vertex => g.n(),
        };
        let mut worst = i64::MIN;
        for x in 0..count {
            let fg = FaultSet::new(kind, [x], g).unwrap();
            let fh = fg.project(g, h.graph());
            let dg = all_pairs_distances(g, &fg).unwrap();
            let dh = all_pairs_distances(h.graph(), &fh).unwrap();
            for &s in sources {
                for t in 0..g.n() {
                    if fg.blocks_vertex(s) || fg.blocks_vertex(t) || dg.get(s, t) == UNREACHABLE {
                        continue;
                    }
                    if dh.get(s, t) == UNREACHABLE {
                        return None;
                    }
                    worst = worst.max(dh.get(s, t) as i64 - alpha * dg.get(s, t) as i64);
                }
            }
        }
        Some(worst)
    }

    fn gnp(n: usize, prob: f64, seed: u64) -> Graph {
        generate(&GeneratorSpec::Gnp { n, prob, connected: true }, seed).unwrap().graph
    }

    #[test]
    fn eft_on_trees_and_cycles() {
        let (s, rounds) = eft_multiplicative_rounds(&path(8), 2, 2).unwrap();
        assert_eq!(s.size(), 7);
        assert_eq!(rounds[0].len(), 7);
        assert!(rounds[1..].iter().all(Vec::is_empty));

        let c4 = cycle(4);
        let s = eft_multiplicative(&c4, 1, 1).unwrap();
        assert_eq!(s.size(), 4);
        assert_eq!(worst_residue(&c4, &s, &[0, 1, 2, 3], FaultKind::Edge, 1), Some(0));
        assert!(eft_multiplicative(&c4, 0, 1).is_err());
        assert!(eft_multiplicative(&c4, 1, 0).is_err());
    }

    #[test]
    fn eft_rounds_are_disjoint_and_stretch_holds() {
        let g = generate(&GeneratorSpec::Gnp { n: 60, prob: 0.2, connected: false }, 3).unwrap().graph;
        let (s, rounds) = eft_multiplicative_rounds(&g, 3, 1).unwrap();
        let mut seen = vec![false; g.m()];
        for e in rounds.iter().flatten() {
            assert!(!seen[*e]);
            seen[*e] = true;
        }
        assert_eq!(s.size(), rounds.iter().map(Vec::len).sum::<usize>());
        let all: Vec<Vertex> = (0..g.n()).collect();
        let worst = worst_residue(&g, &s, &all, FaultKind::Edge, 5).unwrap();
        assert!(worst <= 0, "worst {worst}");
    }

    #[test]
    fn preserver_on_c4_and_trees() {
        let c4 = cycle(4);
        assert_eq!(sourcewise_ft_preserver(&c4, &[0], FaultKind::Edge).unwrap().size(), 4);
        let t = star(5);
        assert_eq!(sourcewise_ft_preserver(&t, &[0, 3], FaultKind::Edge).unwrap().size(), 5);
        assert_eq!(sourcewise_ft_preserver(&t, &[3], FaultKind::Vertex).unwrap().size(), 5);
        let empty = sourcewise_ft_preserver(&c4, &[], FaultKind::Edge).unwrap();
        assert_eq!(empty.size(), 0);
        assert!(sourcewise_ft_preserver(&c4, &[9], FaultKind::Edge).is_err());
    }

    #[test]
    fn preserver_is_exact() {
        for seed in 0..3 {
            let g = gnp(60, 0.2, seed);
            let sources = [0, 7, 19, 33];
            for kind in [FaultKind::Edge, FaultKind::Vertex] {
                let h = sourcewise_ft_preserver(&g, &sources, kind).unwrap();
                assert_eq!(h.claim().sources.as_deref(), Some(&sources[..]));
                assert_eq!(worst_residue(&g, &h, &sources, kind, 1), Some(0), "seed {seed} {kind}");
            }
        }
    }

    #[test]
    fn augment_of_whole_graph_adds_nothing() {
        let g = gnp(30, 0.2, 1);
        let a = Spanner::new(&g, 0..g.m(), Claim::standard(1, 0), "whole").unwrap();
        let (h, stats) = sourcewise_ft_augment(&g, &a, &[0, 5], FaultKind::Edge).unwrap();
        assert_eq!(h.size(), g.m());
        assert_eq!(stats.added_per_source, vec![0, 0]);
    }

    #[test]
    fn augment_on_c6() {
        let g = cycle(6);
        let (a, _) = acim_2additive(&g).unwrap();
        let (h, _) = sourcewise_ft_augment(&g, &a, &[0], FaultKind::Edge).unwrap();
        let w = worst_residue(&g, &h, &[0], FaultKind::Edge, 1).unwrap();
        assert!(w <= 2);
    }

    #[test]
    fn augment_repairs_a_bare_tree() {
        // Starting from a spanning tree with a false zero-stretch claim, the
        // fault-free pass alone must rebuild exact distances from the source.
        let g = gnp(40, 0.15, 4);
        let tree = crate::graph::shortest_path_tree(&g, 20, &FaultSet::empty()).unwrap();
        let ids: Vec<EdgeId> = tree.tree_edges().map(|(p, v)| g.edge_id(p, v).unwrap()).collect();
        let a = Spanner::new(&g, ids, Claim::standard(1, 0), "tree").unwrap();
        for kind in [FaultKind::Edge, FaultKind::Vertex] {
            let (h, _) = sourcewise_ft_augment(&g, &a, &[0, 3], kind).unwrap();
            assert_eq!(worst_residue(&g, &h, &[0, 3], kind, 1), Some(0));
        }
    }

    #[test]
    fn augmented_two_additive_holds_and_stays_small() {
        for seed in 0..3 {
            let g = gnp(100, 0.1, seed);
            let (a, _) = acim_2additive(&g).unwrap();
            let sources = [0, 11, 50, 99.min(g.n() - 1)];
            for kind in [FaultKind::Edge, FaultKind::Vertex] {
                let (h, stats) = sourcewise_ft_augment(&g, &a, &sources, kind).unwrap();
                let w = worst_residue(&g, &h, &sources, kind, 1).unwrap();
                assert!(w <= 2, "seed {seed} {kind}: {w}");
                for &added in &stats.added_per_source {
                    assert!(added <= 8 * g.n());
                }
            }
        }
    }

    #[test]
    fn factory_records_sizes() {
        let g = gnp(40, 0.2, 2);
        let mut f = SourcewiseFactory::new(FactoryKind::Augmented2Additive, FaultKind::Vertex);
        let h = f.build(&g, &[1, 2]).unwrap();
        assert_eq!(f.size_gamma, vec![GammaSample { n: g.n(), sources: 2, edges: h.size() }]);
        assert_eq!(h.claim().beta, 2);
        assert_eq!(h.claim().kind, ClaimKind::Vertex);
        assert_eq!(SourcewiseFactory::new(FactoryKind::Preserver, FaultKind::Edge).beta(), 0);
    }
}
