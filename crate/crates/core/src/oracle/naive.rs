//! A deliberately plain second verifier used to cross-check the optimized
//! one: it rebuilds both damaged graphs from scratch for every fault set and
//! runs its own queue-based BFS for every pair.

use std::collections::VecDeque;

use super::{sample_fault_sets, Counts, StretchReport, VerifyMode, Witness};
use crate::graph::{FaultKind, Graph, Vertex};
use crate::spanner::Spanner;

const INF: u32 = u32::MAX;

fn subsets(universe: usize, size: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for x in from..universe {
        cur.push(x);
        subsets(universe, size, x + 1, cur, out);
        cur.pop();
    }
}

/// Adjacency lists of `g` minus the failed components.
fn damaged(g: &Graph, edges: &[(Vertex, Vertex)], kind: FaultKind, faults: &[usize]) -> Vec<Vec<Vertex>> {
    let mut adj = vec![Vec::new(); g.n()];
    for &(u, v) in edges {
        let dead = match kind {
            FaultKind::Edge => faults.iter().any(|&e| g.endpoints(e) == (u, v)),
            FaultKind::Vertex => faults.contains(&u) || faults.contains(&v),
        };
        if !dead {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    adj
}

fn distance(adj: &[Vec<Vertex>], s: Vertex, t: Vertex) -> u32 {
    let mut dist = vec![INF; adj.len()];
    let mut queue = VecDeque::new();
    dist[s] = 0;
    queue.push_back(s);
    while let Some(x) = queue.pop_front() {
        if x == t {
            return dist[x];
        }
        for &y in &adj[x] {
            if dist[y] == INF {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    INF
}

/// Same contract as [`super::verify`] without a budget.
pub fn verify_naive(g: &Graph, h: &Spanner, sources: Option<&[Vertex]>, mode: VerifyMode) -> StretchReport {
    let mut claim = h.claim().clone();
    let mut src: Vec<Vertex> = match sources {
        Some(s) => s.to_vec(),
        None => match &claim.sources {
            Some(s) => s.clone(),
            None => (0..g.n()).collect(),
        },
    };
    src.sort_unstable();
    src.dedup();
    if sources.is_some() {
        claim.sources = Some(src.clone());
    }
    let kind = claim.kind.fault_kind().unwrap_or(FaultKind::Edge);
    let f = claim.fault_budget();
    let universe = if kind == FaultKind::Edge { g.m() } else { g.n() };
    let mut sets = Vec::new();
    match mode {
        VerifyMode::Exhaustive => {
            for size in 0..=f.min(universe) {
                subsets(universe, size, 0, &mut Vec::new(), &mut sets);
            }
        }
        VerifyMode::Sampled { count, seed } => {
            sets.push(Vec::new());
            sets.extend(sample_fault_sets(universe, f, count, seed));
        }
    }
    let g_edges: Vec<(Vertex, Vertex)> = g.edges().to_vec();
    let h_edges: Vec<(Vertex, Vertex)> = h.edges().iter().map(|&e| g.endpoints(e)).collect();
    let mut counts = Counts { fault_sets: sets.len() as u64, ..Counts::default() };
    let mut worst: Option<(i64, Witness)> = None;
    let mut cut: Option<Witness> = None;
    for faults in &sets {
        let gf = damaged(g, &g_edges, kind, faults);
        let hf = damaged(g, &h_edges, kind, faults);
        let alive = |v: Vertex| !(kind == FaultKind::Vertex && faults.contains(&v));
        for &s in &src {
            for t in 0..g.n() {
                if s == t || !alive(s) || !alive(t) || (src.contains(&t) && t < s) {
                    continue;
                }
                let dg = distance(&gf, s, t);
                if dg == INF {
                    counts.pairs_skipped_disconnected += 1;
                    continue;
                }
                counts.pairs_checked += 1;
                let dh = distance(&hf, s, t);
                let witness = Witness { s, t, faults: faults.clone(), d_g: dg, d_h: (dh != INF).then_some(dh) };
                if dh == INF {
                    counts.unbounded_pairs += 1;
                    cut.get_or_insert(witness);
                    continue;
                }
                let r = dh as i64 - claim.alpha as i64 * dg as i64;
                match &worst {
                    Some((m, _)) if *m >= r => {}
                    _ => worst = Some((r, witness)),
                }
            }
        }
    }
    let max_additive = worst.as_ref().map(|(m, _)| *m);
    let pass = counts.unbounded_pairs == 0 && max_additive.is_none_or(|m| m <= claim.beta as i64);
    StretchReport { claim, mode, max_additive, witness: cut.or(worst.map(|(_, w)| w)), counts, pass }
}
