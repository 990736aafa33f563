//! Certifies a spanner's claim by comparing exact distances in `G - F` and
//! `H - F` for every enumerated fault set `F`.
//!
//! Pairs are visited in a fixed order: fault sets by size and then
//! lexicographically (or in sample order), sources ascending, targets
//! ascending. The witness is the first pair in that order attaining the
//! reported maximum, so reports do not depend on thread scheduling.

pub mod naive;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generate::below;
use crate::graph::{BfsScratch, FaultKind, FaultSet, Graph, GraphError, Vertex, UNREACHABLE};
use crate::spanner::{Claim, Spanner, SpannerError};

/// Default ceiling on estimated BFS edge relaxations for exhaustive runs.
pub const DEFAULT_BUDGET: u64 = 5_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VerifyMode {
    Exhaustive,
    /// The empty fault set plus `count` seeded fault sets of maximum size.
    Sampled {
        count: usize,
        seed: u64,
    },
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(
        "exhaustive verification needs about {estimate} edge relaxations, above the budget of {budget}; sample instead"
    )]
    BudgetExceeded { estimate: u128, budget: u64 },
    #[error(transparent)]
    Spanner(#[from] SpannerError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub s: Vertex,
    pub t: Vertex,
    /// Failed edge ids or vertex ids, per the claim's kind.
    pub faults: Vec<usize>,
    pub d_g: u32,
    /// `None` when the pair is disconnected in `H - F`.
    pub d_h: Option<u32>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub fault_sets: u64,
    pub pairs_checked: u64,
    pub pairs_skipped_disconnected: u64,
    /// Pairs connected in `G - F` but not in `H - F`.
    pub unbounded_pairs: u64,
}

/// Worst additive residue `d_{H-F}(s,t) - alpha * d_{G-F}(s,t)` found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StretchReport {
    pub claim: Claim,
    pub mode: VerifyMode,
    /// `None` when no pair with finite distance in `H - F` was checked.
    pub max_additive: Option<i64>,
    /// The first disconnected pair if any, otherwise the first pair
    /// attaining `max_additive`.
    pub witness: Option<Witness>,
    pub counts: Counts,
    pub pass: bool,
}

impl StretchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Per-fault-set findings, merged in enumeration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Partial {
    checked: u64,
    skipped: u64,
    unbounded: u64,
    max: Option<(i64, Witness)>,
    first_unbounded: Option<Witness>,
}

impl Partial {
    fn record(&mut self, s: Vertex, t: Vertex, faults: &[usize], dg: u32, dh: u32, alpha: i64) {
        if dg == UNREACHABLE {
            self.skipped += 1;
            return;
        }
        self.checked += 1;
        if dh == UNREACHABLE {
            self.unbounded += 1;
            if self.first_unbounded.is_none() {
                self.first_unbounded = Some(Witness { s, t, faults: faults.to_vec(), d_g: dg, d_h: None });
            }
            return;
        }
        let residue = dh as i64 - alpha * dg as i64;
        if self.max.as_ref().is_none_or(|(m, _)| residue > *m) {
            self.max = Some((residue, Witness { s, t, faults: faults.to_vec(), d_g: dg, d_h: Some(dh) }));
        }
    }

    /// Appends `later`, which comes after `self` in enumeration order.
    fn merge(mut self, later: Partial) -> Partial {
        self.checked += later.checked;
        self.skipped += later.skipped;
        self.unbounded += later.unbounded;
        if self.first_unbounded.is_none() {
            self.first_unbounded = later.first_unbounded;
        }
        if let Some((m, w)) = later.max {
            if self.max.as_ref().is_none_or(|(cur, _)| m > *cur) {
                self.max = Some((m, w));
            }
        }
        self
    }

    fn into_report(self, claim: Claim, mode: VerifyMode, fault_sets: u64) -> StretchReport {
        let max_additive = self.max.as_ref().map(|(m, _)| *m);
        let pass = self.unbounded == 0 && max_additive.is_none_or(|m| m <= claim.beta as i64);
        let witness = self.first_unbounded.or(self.max.map(|(_, w)| w));
        StretchReport {
            claim,
            mode,
            max_additive,
            witness,
            counts: Counts {
                fault_sets,
                pairs_checked: self.checked,
                pairs_skipped_disconnected: self.skipped,
                unbounded_pairs: self.unbounded,
            },
            pass,
        }
    }
}

/// `count` fault sets, each of `min(f, universe)` distinct sorted items drawn
/// from a ChaCha8 stream seeded with `seed`.
pub fn sample_fault_sets(universe: usize, f: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let size = f.min(universe);
    if size == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut items: Vec<usize> = Vec::with_capacity(size);
            while items.len() < size {
                let x = below(&mut rng, universe as u64) as usize;
                if !items.contains(&x) {
                    items.push(x);
                }
            }
            items.sort_unstable();
            items
        })
        .collect()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of fault sets of size at most `f` over `universe` components.
pub fn exhaustive_fault_sets(universe: usize, f: usize) -> u128 {
    (0..=f).map(|i| binomial(universe as u128, i as u128)).fold(0u128, u128::saturating_add)
}

/// All subsets of `0..universe` of size `0..=f`, by size then
/// lexicographically.
fn enumerate_fault_sets(universe: usize, f: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=f.min(universe) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            out.push(combo.clone());
            let Some(i) = (0..size).rev().find(|&i| combo[i] < universe - size + i) else { break };
            combo[i] += 1;
            for j in i + 1..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    out
}

/// Sources whose pairs are checked: the claim's sources (or all vertices),
/// ascending and deduplicated.
fn source_list(g: &Graph, sources: Option<&[Vertex]>) -> Result<Vec<Vertex>, GraphError> {
    let mut s: Vec<Vertex> = match sources {
        Some(s) => s.to_vec(),
        None => (0..g.n()).collect(),
    };
    s.sort_unstable();
    s.dedup();
    for &v in &s {
        g.check_vertex(v)?;
    }
    Ok(s)
}

/// Verifies `h`'s own claim, restricted to its sources when it has them.
pub fn verify_claim(g: &Graph, h: &Spanner, mode: VerifyMode) -> Result<StretchReport, VerifyError> {
    verify(g, h, None, mode, DEFAULT_BUDGET)
}

/// Verifies `h`'s claim for pairs with an endpoint in `sources`.
pub fn verify_sourcewise(
    g: &Graph,
    h: &Spanner,
    sources: &[Vertex],
    mode: VerifyMode,
) -> Result<StretchReport, VerifyError> {
    verify(g, h, Some(sources), mode, DEFAULT_BUDGET)
}

/// Full verification entry point with an explicit relaxation budget.
/// Without explicit sources the claim's own sources (or every vertex) are
/// used.
pub fn verify(
    g: &Graph,
    h: &Spanner,
    sources: Option<&[Vertex]>,
    mode: VerifyMode,
    budget: u64,
) -> Result<StretchReport, VerifyError> {
    h.check_host(g)?;
    let sources = sources.or(h.claim().sources.as_deref());
    let claim = match sources {
        Some(s) => h.claim().clone().with_sources(source_list(g, Some(s))?),
        None => h.claim().clone(),
    };
    let sources = source_list(g, sources)?;
    let kind = claim.kind.fault_kind().unwrap_or(FaultKind::Edge);
    let f = claim.fault_budget();
    let universe = match kind {
        FaultKind::Edge => g.m(),
        FaultKind::Vertex => g.n(),
    };
    let fault_sets = match mode {
        VerifyMode::Exhaustive => {
            let count = exhaustive_fault_sets(universe, f);
            let per_set = sources.len() as u128 * 2 * (2 * g.m() as u128 + g.n() as u128);
            let estimate = count.saturating_mul(per_set);
            if estimate > budget as u128 {
                return Err(VerifyError::BudgetExceeded { estimate, budget });
            }
            enumerate_fault_sets(universe, f)
        }
        VerifyMode::Sampled { count, seed } => {
            let mut sets = vec![Vec::new()];
            sets.extend(sample_fault_sets(universe, f, count, seed));
            sets
        }
    };
    let alpha = claim.alpha as i64;
    let hg = h.graph();
    let in_source = {
        let mut mark = vec![false; g.n()];
        for &s in &sources {
            mark[s] = true;
        }
        mark
    };
    // Distances in the intact spanner, reused whenever no failed edge is in it.
    let base_h: Vec<Vec<u32>> = sources
        .par_iter()
        .map_init(BfsScratch::new, |scratch, &s| scratch.run(hg, s, &FaultSet::empty()).to_vec())
        .collect();
    let partials: Vec<Partial> = fault_sets
        .par_iter()
        .map_init(
            || (BfsScratch::new(), BfsScratch::new()),
            |(sg, sh), items| {
                let fg = FaultSet::from_sorted(kind, items.clone());
                let fh = fg.project(g, hg);
                let h_intact = kind == FaultKind::Edge && fh.is_empty();
                let mut part = Partial::default();
                for (si, &s) in sources.iter().enumerate() {
                    if fg.blocks_vertex(s) {
                        continue;
                    }
                    let dg = sg.run(g, s, &fg);
                    let dh: &[u32] = if h_intact { &base_h[si] } else { sh.run(hg, s, &fh) };
                    for t in 0..g.n() {
                        if t == s || fg.blocks_vertex(t) || (in_source[t] && t < s) {
                            continue;
                        }
                        part.record(s, t, items, dg[t], dh[t], alpha);
                    }
                }
                part
            },
        )
        .collect();
    let merged = partials.into_iter().fold(Partial::default(), Partial::merge);
    Ok(merged.into_report(claim, mode, fault_sets.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::naive::verify_naive;
    use super::*;
    use crate::graph::fixtures::*;
    use crate::spanner::ClaimKind;
    use proptest::prelude::*;

    fn subgraph(g: &Graph, keep: u64, claim: Claim) -> Spanner {
        Spanner::new(g, (0..g.m()).filter(|&e| (keep >> (e % 64)) & 1 == 1), claim, "sub").unwrap()
    }

    proptest! {
        #[test]
        fn matches_naive_verifier(
            g in arb_graph(9),
            keep in any::<u64>(),
            f in 0u32..3,
            vertex in any::<bool>(),
            beta in 0u32..4,
            sampled in proptest::option::of((1usize..6, any::<u64>())),
            src in proptest::option::of(proptest::collection::vec(0usize..9, 0..4)),
            claim_src in proptest::option::of(proptest::collection::vec(0usize..9, 0..4)),
        ) {
            let kind = if f == 0 { ClaimKind::None } else if vertex { ClaimKind::Vertex } else { ClaimKind::Edge };
            let mut claim = Claim::new(1, beta, f, kind);
            if let Some(v) = claim_src {
                claim = claim.with_sources(v.into_iter().filter(|&x| x < g.n()).collect());
            }
            let h = subgraph(&g, keep, claim);
            let mode = match sampled {
                Some((count, seed)) => VerifyMode::Sampled { count, seed },
                None => VerifyMode::Exhaustive,
            };
            let src: Option<Vec<Vertex>> = src.map(|v| v.into_iter().filter(|&x| x < g.n()).collect());
            let fast = verify(&g, &h, src.as_deref(), mode, DEFAULT_BUDGET).unwrap();
            let slow = verify_naive(&g, &h, src.as_deref(), mode);
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn more_edges_never_hurt(g in arb_graph(9), keep in any::<u64>(), extra in any::<u64>(), f in 1u32..3) {
            let claim = Claim::new(1, 0, f, ClaimKind::Edge);
            let small = subgraph(&g, keep, claim.clone());
            let large = subgraph(&g, keep | extra, claim);
            let a = verify_claim(&g, &small, VerifyMode::Exhaustive).unwrap();
            let b = verify_claim(&g, &large, VerifyMode::Exhaustive).unwrap();
            prop_assert!(b.counts.unbounded_pairs <= a.counts.unbounded_pairs);
            if a.counts.unbounded_pairs == 0 {
                prop_assert!(b.max_additive <= a.max_additive);
            }
        }
    }

    #[test]
    fn enumeration_order_and_counts() {
        let sets = enumerate_fault_sets(4, 2);
        assert_eq!(sets.len(), 1 + 4 + 6);
        assert_eq!(sets[0], Vec::<usize>::new());
        assert_eq!(sets[5], vec![0, 1]);
        assert_eq!(sets[10], vec![2, 3]);
        assert_eq!(exhaustive_fault_sets(4, 2), 11);
        assert_eq!(exhaustive_fault_sets(3, 5), 8);
        assert_eq!(enumerate_fault_sets(2, 3).len(), 4);
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample_fault_sets(50, 2, 20, 9);
        assert_eq!(a, sample_fault_sets(50, 2, 20, 9));
        assert_ne!(a, sample_fault_sets(50, 2, 20, 10));
        assert!(a.iter().all(|s| s.len() == 2 && s[0] < s[1] && s[1] < 50));
        assert!(sample_fault_sets(0, 2, 5, 1).is_empty());
    }

    #[test]
    fn whole_graph_has_zero_residue() {
        let g = petersen();
        let h = Spanner::new(&g, 0..g.m(), Claim::new(1, 0, 2, ClaimKind::Edge), "whole").unwrap();
        let r = verify_claim(&g, &h, VerifyMode::Exhaustive).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_additive, Some(0));
        assert_eq!(r.counts.fault_sets, 1 + 15 + 105);
        assert_eq!(r.counts.pairs_checked, 121 * 45);
    }

    #[test]
    fn spanning_tree_of_c4() {
        let g = cycle(4);
        let tree = Spanner::new(&g, [0, 1, 2], Claim::new(1, 2, 1, ClaimKind::Edge), "tree").unwrap();
        let r = verify_claim(&g, &tree, VerifyMode::Exhaustive).unwrap();
        assert!(!r.pass);
        assert_eq!(r.counts.fault_sets, 5);
        assert!(r.counts.unbounded_pairs > 0);
        let w = r.witness.unwrap();
        assert_eq!(w.d_h, None);
        assert_eq!(w.faults.len(), 1);
        assert_eq!(r.max_additive, Some(2));
    }

    #[test]
    fn vertex_faults_skip_failed_endpoints() {
        let g = star(4);
        let h = Spanner::new(&g, 0..g.m(), Claim::new(1, 0, 1, ClaimKind::Vertex), "whole").unwrap();
        let r = verify_claim(&g, &h, VerifyMode::Exhaustive).unwrap();
        // Empty set: 10 pairs. Center failed: 6 disconnected leaf pairs.
        // A leaf failed: 6 pairs among the remaining four vertices.
        assert_eq!(r.counts.pairs_checked, 10 + 4 * 6);
        assert_eq!(r.counts.pairs_skipped_disconnected, 6);
        assert!(r.pass);
    }

    #[test]
    fn sourcewise_degenerate_sets() {
        let g = cycle(5);
        let h = Spanner::new(&g, 0..g.m(), Claim::new(1, 0, 1, ClaimKind::Edge), "whole").unwrap();
        let all: Vec<Vertex> = (0..5).collect();
        let full = verify_claim(&g, &h, VerifyMode::Exhaustive).unwrap();
        let sw = verify_sourcewise(&g, &h, &all, VerifyMode::Exhaustive).unwrap();
        assert_eq!(full.counts, sw.counts);
        assert_eq!(full.max_additive, sw.max_additive);
        let none = verify_sourcewise(&g, &h, &[], VerifyMode::Exhaustive).unwrap();
        assert!(none.pass);
        assert_eq!(none.counts.pairs_checked, 0);
        assert_eq!(none.max_additive, None);
    }

    #[test]
    fn budget_guard_and_sampling() {
        let g = complete(30);
        let h = Spanner::new(&g, 0..g.m(), Claim::new(1, 0, 3, ClaimKind::Edge), "whole").unwrap();
        assert!(matches!(
            verify(&g, &h, None, VerifyMode::Exhaustive, 1_000_000),
            Err(VerifyError::BudgetExceeded { .. })
        ));
        let mode = VerifyMode::Sampled { count: 25, seed: 3 };
        let a = verify_claim(&g, &h, mode).unwrap();
        let b = verify_claim(&g, &h, mode).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.fault_sets, 26);
        let json = a.to_json();
        for key in ["claim", "mode", "max_additive", "witness", "counts", "pass"] {
            assert!(json.contains(&format!("\"{key}\"")));
        }
    }
}
