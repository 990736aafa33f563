//! The union of an additive spanner and a multiplicative `f`-EFT spanner,
//! and the block decomposition of a replacement path that explains its
//! stretch.

use serde::{Deserialize, Serialize};

use crate::graph::{
    canonical_shortest_path, BfsScratch, EdgeId, FaultKind, FaultSet, Graph, ShortestPathTree, Vertex, UNREACHABLE,
};
use crate::spanner::{Claim, ClaimKind, Spanner, SpannerError};

/// Additive stretch of the union for `f` faults, followed by the older
/// bound `2f(2 beta + alpha - 1) + beta` it improves on. A single fault
/// gives `2 beta + alpha - 1`; more give `2f(beta + alpha - 1) + beta`.
pub fn stretch_claim(alpha: u32, beta: u32, f: u32) -> Result<(u32, u32), SpannerError> {
    if alpha == 0 || f == 0 {
        return Err(SpannerError::InvalidParameter(format!("need alpha >= 1 and f >= 1, got alpha={alpha} f={f}")));
    }
    let new = if f == 1 { 2 * beta + alpha - 1 } else { 2 * f * (beta + alpha - 1) + beta };
    let old = 2 * f * (2 * beta + alpha - 1) + beta;
    Ok((new, old))
}

/// `H = A + M` for an additive `a` and a multiplicative edge-fault-tolerant
/// `m`.
pub fn union_spanner(g: &Graph, a: &Spanner, m: &Spanner) -> Result<Spanner, SpannerError> {
    a.check_host(g)?;
    m.check_host(g)?;
    if a.host_hash() != m.host_hash() {
        return Err(SpannerError::HostMismatch);
    }
    let ac = a.claim();
    if ac.alpha != 1 || ac.kind != ClaimKind::None {
        return Err(SpannerError::Claim(format!("first spanner must be purely additive, got {ac:?}")));
    }
    let mc = m.claim();
    if mc.beta != 0 || mc.kind != ClaimKind::Edge || mc.sources.is_some() {
        return Err(SpannerError::Claim(format!(
            "second spanner must be multiplicative edge-fault-tolerant, got {mc:?}"
        )));
    }
    let (beta, _) = stretch_claim(mc.alpha, ac.beta, mc.f)?;
    let mut mask = a.mask(g);
    for &e in m.edges() {
        mask[e] = true;
    }
    Spanner::from_mask(
        g,
        &mask,
        Claim::new(1, beta, mc.f, ClaimKind::Edge),
        format!("union(base={},mult={})", a.provenance(), m.provenance()),
    )
}

/// A failed edge in the direction it is traversed.
pub type DirectedEdge = (Vertex, Vertex);

/// One block `B_i` of the decomposition. Positions index the replacement
/// path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub x1: Vertex,
    pub x2: Vertex,
    pub y1: Vertex,
    pub y2: Vertex,
    pub y_bot: Vertex,
    /// Positions of `x1`, `x2`, `y1`, `y2`, `y_bot` on the path.
    pub positions: [usize; 5],
    /// The failed edge first met on the spanner path from `x1` to `x2`.
    pub class: DirectedEdge,
    /// Class of the pair `(x1, y_bot)`, kept for diagnostics.
    pub endpoint_class: Option<DirectedEdge>,
}

impl Block {
    /// Blocks whose last occurrence of the class starts at `x1` itself.
    pub fn is_degenerate(&self) -> bool {
        self.positions[0] == self.positions[2]
    }
}

/// The final block `B*`, from `x1` to the target, of class `Phi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBlock {
    pub x1: Vertex,
    pub y_bot: Vertex,
    pub start: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub s: Vertex,
    pub t: Vertex,
    /// Failed host edge ids.
    pub faults: Vec<EdgeId>,
    /// The canonical replacement path from `s` to `t` avoiding the faults.
    pub path: Vec<Vertex>,
    pub blocks: Vec<Block>,
    pub tail: TailBlock,
}

/// First failed edge met on the canonical spanner path between each pair of
/// path positions, as a dense table over positions.
struct ClassTable {
    len: usize,
    data: Vec<Option<DirectedEdge>>,
}

impl ClassTable {
    fn build(g: &Graph, a: &Spanner, faults: &FaultSet, path: &[Vertex]) -> Result<Self, SpannerError> {
        let ag = a.graph();
        let failed = |u: Vertex, v: Vertex| g.edge_id(u, v).is_some_and(|e| faults.blocks_edge(e));
        let len = path.len();
        let mut data = vec![None; len * len];
        let mut scratch = BfsScratch::new();
        let mut order: Vec<Vertex> = Vec::with_capacity(ag.n());
        let mut first = vec![None; ag.n()];
        for (i, &u) in path.iter().enumerate() {
            let tree = ShortestPathTree::build(ag, u, &mut scratch, |_| true, |_| true);
            order.clear();
            order.extend((0..ag.n()).filter(|&v| tree.dist[v] != UNREACHABLE));
            order.sort_by_key(|&v| tree.dist[v]);
            for &v in &order {
                first[v] = match tree.parent[v] {
                    None => None,
                    Some(p) => first[p].or_else(|| failed(p, v).then_some((p, v))),
                };
            }
            for (j, &v) in path.iter().enumerate() {
                if tree.dist[v] == UNREACHABLE {
                    return Err(SpannerError::Precondition(format!("spanner does not connect {u} and {v}")));
                }
                data[i * len + j] = first[v];
            }
        }
        Ok(Self { len, data })
    }

    fn get(&self, i: usize, j: usize) -> Option<DirectedEdge> {
        self.data[i * self.len + j]
    }
}

/// Partitions the canonical `s`-`t` path of `g - faults` into blocks. From
/// the current start `x1`, `x2` is the first later vertex whose class with
/// `x1` is a failed edge `c`; `(y1, y2)` is the last pair of path positions
/// (in lexicographic order, first coordinate at or after `x1`) with class
/// `c`; the next block starts at the successor of `y1`. The tail block
/// begins once the class to `t` is fault-free. Path order is position order.
pub fn decompose_blocks(
    g: &Graph,
    a: &Spanner,
    faults: &FaultSet,
    s: Vertex,
    t: Vertex,
) -> Result<BlockDecomposition, SpannerError> {
    a.check_host(g)?;
    faults.validate(g)?;
    if faults.kind() != FaultKind::Edge && !faults.is_empty() {
        return Err(SpannerError::Precondition("block decomposition needs edge faults".into()));
    }
    let path = canonical_shortest_path(g, s, t, faults)?;
    let table = ClassTable::build(g, a, faults, &path)?;
    let last = path.len() - 1;
    let mut blocks = Vec::new();
    let mut start = 0;
    while table.get(start, last).is_some() {
        let x2 = (start + 1..=last).find(|&j| table.get(start, j).is_some()).expect("class to t is a failed edge");
        let class = table.get(start, x2).expect("nonempty");
        let (y1, y2) = (start..last)
            .rev()
            .find_map(|i| (i + 1..=last).rev().find(|&j| table.get(i, j) == Some(class)).map(|j| (i, j)))
            .expect("(x1, x2) has the class");
        let y_bot = y1 + 1;
        blocks.push(Block {
            x1: path[start],
            x2: path[x2],
            y1: path[y1],
            y2: path[y2],
            y_bot: path[y_bot],
            positions: [start, x2, y1, y2, y_bot],
            class,
            endpoint_class: table.get(start, y_bot),
        });
        start = y_bot;
    }
    Ok(BlockDecomposition {
        s,
        t,
        faults: faults.items().to_vec(),
        path: path.clone(),
        blocks,
        tail: TailBlock { x1: path[start], y_bot: t, start },
    })
}

/// Class of `(u, v)` recomputed from scratch: the first failed edge on the
/// canonical `u`-`v` path of the spanner.
pub fn pair_class(
    g: &Graph,
    a: &Spanner,
    faults: &FaultSet,
    u: Vertex,
    v: Vertex,
) -> Result<Option<DirectedEdge>, SpannerError> {
    let p = canonical_shortest_path(a.graph(), u, v, &FaultSet::empty())?;
    Ok(p.windows(2).find(|w| g.edge_id(w[0], w[1]).is_some_and(|e| faults.blocks_edge(e))).map(|w| (w[0], w[1])))
}

impl BlockDecomposition {
    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decomposition serializes")
    }

    /// Checks the structural invariants, recomputing every class
    /// independently: chaining, at most two blocks per failed edge, a
    /// fault-free tail, minimality of `x2`, and that no pair at or after a
    /// block's `y_bot` has that block's class again.
    pub fn check(&self, g: &Graph, a: &Spanner) -> Result<(), String> {
        let faults = FaultSet::edges(self.faults.iter().copied(), g).map_err(|e| e.to_string())?;
        let class = |u, v| pair_class(g, a, &faults, u, v).map_err(|e| e.to_string());
        let path = &self.path;
        if path.first() != Some(&self.s) || path.last() != Some(&self.t) {
            return Err("path endpoints differ from (s, t)".into());
        }
        if self.k() > 2 * self.faults.len() {
            return Err(format!("{} blocks for {} faults", self.k(), self.faults.len()));
        }
        let mut start = 0;
        for (b, block) in self.blocks.iter().enumerate() {
            let [x1, x2, y1, y2, y_bot] = block.positions;
            if x1 != start || !(x1 < x2 && x1 <= y1 && y1 < y2 && y_bot == y1 + 1) || y2 >= path.len() {
                return Err(format!("block {b} positions {:?} do not chain from {start}", block.positions));
            }
            let vertices = [block.x1, block.x2, block.y1, block.y2, block.y_bot];
            if vertices.iter().zip(block.positions).any(|(&v, p)| path[p] != v) {
                return Err(format!("block {b} vertices disagree with positions"));
            }
            if class(path[x1], path[x2])? != Some(block.class) || class(path[y1], path[y2])? != Some(block.class) {
                return Err(format!("block {b} class mismatch"));
            }
            for j in x1 + 1..x2 {
                if class(path[x1], path[j])?.is_some() {
                    return Err(format!("block {b}: x2 is not the first vertex with a failed class"));
                }
            }
            for i in y_bot..path.len() {
                for j in i..path.len() {
                    if class(path[i], path[j])? == Some(block.class) {
                        return Err(format!("block {b}: class {:?} recurs at positions ({i}, {j})", block.class));
                    }
                }
            }
            start = y_bot;
        }
        if self.tail.start != start || self.tail.x1 != path[start] || self.tail.y_bot != self.t {
            return Err("tail block does not continue the chain".into());
        }
        if class(self.tail.x1, self.t)?.is_some() {
            return Err("tail block has a failed class".into());
        }
        let mut seen: Vec<DirectedEdge> = self.blocks.iter().map(|b| b.class).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err("a class labels two blocks".into());
        }
        Ok(())
    }

    /// Largest `d_{H-F}(x1, y_bot) - d_{G-F}(x1, y_bot)` over the blocks, with
    /// the block index; `None` if there are no blocks. A disconnected pair
    /// in `h` reports `i64::MAX`.
    pub fn worst_block_detour(&self, g: &Graph, h: &Spanner) -> Result<Option<(usize, i64)>, SpannerError> {
        let faults = FaultSet::edges(self.faults.iter().copied(), g)?;
        let hf = faults.project(g, h.graph());
        let mut scratch = BfsScratch::new();
        let mut worst: Option<(usize, i64)> = None;
        for (b, block) in self.blocks.iter().enumerate() {
            let dg = (block.positions[4] - block.positions[0]) as i64;
            let dh = scratch.run(h.graph(), block.x1, &hf)[block.y_bot];
            let excess = if dh == UNREACHABLE { i64::MAX } else { dh as i64 - dg };
            if worst.is_none_or(|(_, w)| excess > w) {
                worst = Some((b, excess));
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::acim_2additive;
    use crate::ft_blocks::eft_multiplicative;
    use crate::graph::fixtures::*;
    use proptest::prelude::*;

    fn whole(g: &Graph) -> Spanner {
        Spanner::new(g, 0..g.m(), Claim::standard(1, 0), "whole").unwrap()
    }

    #[test]
    fn claims() {
        assert_eq!(stretch_claim(5, 6, 1).unwrap(), (16, 38));
        assert_eq!(stretch_claim(5, 4, 1).unwrap().1, 28);
        assert_eq!(stretch_claim(3, 4, 1).unwrap().1, 24);
        assert_eq!(stretch_claim(3, 2, 2).unwrap().0, 18);
        assert_eq!(stretch_claim(3, 2, 1).unwrap().0, 6);
        for f in 1..5 {
            assert_eq!(stretch_claim(1, 0, f).unwrap(), (0, 0));
        }
        assert!(stretch_claim(0, 1, 1).is_err());
        assert!(stretch_claim(1, 1, 0).is_err());
    }

    #[test]
    fn union_claims_and_checks() {
        let g = petersen();
        let (a, _) = acim_2additive(&g).unwrap();
        let m = eft_multiplicative(&g, 2, 2).unwrap();
        let h = union_spanner(&g, &a, &m).unwrap();
        assert_eq!(h.claim(), &Claim::new(1, 18, 2, ClaimKind::Edge));
        assert!(union_spanner(&g, &m, &a).is_err());
        let zero = union_spanner(
            &g,
            &whole(&g),
            &Spanner::new(&g, 0..g.m(), Claim::new(1, 0, 3, ClaimKind::Edge), "w").unwrap(),
        );
        assert_eq!(zero.unwrap().claim().beta, 0);
    }

    #[test]
    fn fault_free_is_one_tail() {
        let g = cycle(6);
        let d = decompose_blocks(&g, &whole(&g), &FaultSet::empty(), 0, 3).unwrap();
        assert_eq!(d.k(), 0);
        assert_eq!(d.tail.x1, 0);
        assert_eq!(d.path.len(), 4);
        d.check(&g, &whole(&g)).unwrap();
    }

    #[test]
    fn c6_single_fault() {
        let g = cycle(6);
        let a = whole(&g);
        let f = FaultSet::edge_between(&g, 1, 2).unwrap();
        let d = decompose_blocks(&g, &a, &f, 0, 2).unwrap();
        assert_eq!(d.path, vec![0, 5, 4, 3, 2]);
        assert_eq!(d.k(), 1);
        let b = &d.blocks[0];
        assert_eq!((b.x1, b.x2, b.class), (0, 3, (1, 2)));
        // 5 also reaches 2 through 0-1-2; 4 does not.
        assert_eq!((b.y1, b.y2, b.y_bot), (5, 2, 4));
        assert_eq!(d.tail.x1, 4);
        d.check(&g, &a).unwrap();
        let json = d.to_json();
        assert!(json.contains("\"blocks\""));
        let back: BlockDecomposition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn rejects_vertex_faults_and_disconnection() {
        let g = cycle(5);
        let f = FaultSet::vertices([2], &g).unwrap();
        assert!(decompose_blocks(&g, &whole(&g), &f, 0, 3).is_err());
        let p = path(4);
        let f = FaultSet::edge_between(&p, 1, 2).unwrap();
        assert!(decompose_blocks(&p, &whole(&p), &f, 0, 3).is_err());
    }

    proptest! {
        #[test]
        fn decompositions_satisfy_invariants(g in arb_graph(10), picks in proptest::collection::vec(any::<usize>(), 1..3), st in any::<(usize, usize)>()) {
            prop_assume!(g.m() > 0);
            let (a, _) = acim_2additive(&g).unwrap();
            let faults = FaultSet::edges(picks.iter().map(|p| p % g.m()), &g);
            prop_assume!(faults.is_ok());
            let faults = faults.unwrap();
            let (s, t) = (st.0 % g.n(), st.1 % g.n());
            match decompose_blocks(&g, &a, &faults, s, t) {
                Ok(d) => {
                    prop_assert!(d.check(&g, &a).is_ok(), "{:?}", d.check(&g, &a));
                }
                Err(SpannerError::Graph(crate::graph::GraphError::Disconnected(..))) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
