//! Turning a single-fault sourcewise spanner into an all-pairs fault-tolerant
//! additive spanner by coloring vertices white, black and red.
//!
//! Every vertex starts white with a counter of `f + 1`. While some non-red
//! vertex has at least `p` white neighbors, the lowest-id one becomes a red
//! source; each white neighbor loses one from its counter and contributes
//! its edge to the source, turning black once its counter reaches zero. The
//! spanner is the source edges, every edge at a white vertex, and a
//! sourcewise spanner for the red vertices.

use serde::{Deserialize, Serialize};

use crate::base::ceil_power_ratio;
use crate::ft_blocks::{FactoryKind, SourcewiseFactory};
use crate::graph::{EdgeId, FaultKind, Graph, Vertex};
use crate::spanner::{Claim, Spanner, SpannerError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
    Red,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorState {
    pub color: Vec<Color>,
    pub counter: Vec<u32>,
}

impl ColorState {
    fn new(n: usize, f: u32) -> Self {
        Self { color: vec![Color::White; n], counter: vec![f + 1; n] }
    }

    pub fn counter_sum(&self) -> u64 {
        self.counter.iter().map(|&c| c as u64).sum()
    }

    pub fn count(&self, color: Color) -> usize {
        self.color.iter().filter(|&&c| c == color).count()
    }

    /// Checks the per-state invariants against the selected sources.
    pub fn check(&self, sources: &[Vertex], f: u32) -> Result<(), String> {
        for (v, (&color, &counter)) in self.color.iter().zip(&self.counter).enumerate() {
            if counter > f + 1 {
                return Err(format!("vertex {v} has counter {counter} above {}", f + 1));
            }
            if color == Color::Black && counter != 0 {
                return Err(format!("black vertex {v} has counter {counter}"));
            }
            if (color == Color::Red) != sources.contains(&v) {
                return Err(format!("vertex {v} is {color:?} but source membership disagrees"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alg1Params {
    pub p: usize,
    pub f: u32,
    pub fault_kind: FaultKind,
}

impl Alg1Params {
    pub fn validate(&self, n: usize) -> Result<(), SpannerError> {
        if self.p == 0 || self.p > n.max(1) {
            return Err(SpannerError::InvalidParameter(format!("p must be in [1, {n}], got {}", self.p)));
        }
        if self.f == 0 {
            return Err(SpannerError::InvalidParameter("f must be at least 1".into()));
        }
        Ok(())
    }
}

/// Degree threshold used by the standard instantiations: `n^{2/3}` for the
/// exact preserver, `sqrt n` for the augmented 2-additive factory under edge
/// faults and `sqrt(n ln n)` under vertex faults, all rounded up.
pub fn recommended_p(n: usize, factory: FactoryKind, fault_kind: FaultKind) -> usize {
    let n = n.max(1);
    let p = match (factory, fault_kind) {
        (FactoryKind::Preserver, _) => ceil_power_ratio(n, 2, 3),
        (FactoryKind::Augmented2Additive, FaultKind::Edge) => ceil_power_ratio(n, 1, 2),
        (FactoryKind::Augmented2Additive, FaultKind::Vertex) => {
            let x = n as f64 * (n as f64).ln();
            x.sqrt().ceil() as usize
        }
    };
    p.clamp(1, n)
}

/// One source selection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub source: Vertex,
    /// Decrease of the counter sum caused by this selection.
    pub counter_drop: u64,
    pub newly_black: Vec<Vertex>,
}

/// The coloring loop, advanced one source at a time.
pub struct SourceSelector<'g> {
    g: &'g Graph,
    params: Alg1Params,
    state: ColorState,
    white_degree: Vec<usize>,
    sources: Vec<Vertex>,
    e1: Vec<EdgeId>,
    cursor: usize,
}

impl<'g> SourceSelector<'g> {
    pub fn new(g: &'g Graph, params: Alg1Params) -> Result<Self, SpannerError> {
        params.validate(g.n())?;
        Ok(Self {
            g,
            params,
            state: ColorState::new(g.n(), params.f),
            white_degree: (0..g.n()).map(|v| g.degree(v)).collect(),
            sources: Vec::new(),
            e1: Vec::new(),
            cursor: 0,
        })
    }

    pub fn state(&self) -> &ColorState {
        &self.state
    }

    pub fn sources(&self) -> &[Vertex] {
        &self.sources
    }

    /// Number of white neighbors of `v`.
    pub fn white_degree(&self, v: Vertex) -> usize {
        self.white_degree[v]
    }

    fn leave_white(&mut self, v: Vertex) {
        for &w in self.g.neighbors(v) {
            self.white_degree[w] -= 1;
        }
    }

    /// Selects the next source, or returns `None` once no non-red vertex has
    /// `p` white neighbors. White degrees never grow, so a vertex passed by
    /// the ascending cursor can never qualify again.
    pub fn step(&mut self) -> Option<SelectionStep> {
        let n = self.g.n();
        while self.cursor < n
            && (self.state.color[self.cursor] == Color::Red || self.white_degree[self.cursor] < self.params.p)
        {
            self.cursor += 1;
        }
        if self.cursor == n {
            return None;
        }
        let s = self.cursor;
        if self.state.color[s] == Color::White {
            self.leave_white(s);
        }
        self.state.color[s] = Color::Red;
        self.sources.push(s);
        let mut drop = 0;
        let mut newly_black = Vec::new();
        for (u, e) in self.g.arcs(s) {
            if self.state.color[u] != Color::White {
                continue;
            }
            self.state.counter[u] -= 1;
            drop += 1;
            self.e1.push(e);
            if self.state.counter[u] == 0 {
                self.state.color[u] = Color::Black;
                newly_black.push(u);
            }
        }
        for &u in &newly_black {
            self.leave_white(u);
        }
        Some(SelectionStep { source: s, counter_drop: drop, newly_black })
    }

    pub fn finish(mut self) -> Selection {
        let mut steps = Vec::new();
        while let Some(step) = self.step() {
            steps.push(step);
        }
        self.e1.sort_unstable();
        Selection { sources: self.sources, e1: self.e1, state: self.state, steps }
    }
}

/// Result of the coloring loop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    /// Red vertices in selection order (which is increasing id order).
    pub sources: Vec<Vertex>,
    /// Source-to-neighbor edges, sorted.
    pub e1: Vec<EdgeId>,
    pub state: ColorState,
    pub steps: Vec<SelectionStep>,
}

impl Selection {
    /// Upper bound `floor((f+1) n / p)` on the number of sources.
    pub fn source_bound(n: usize, params: &Alg1Params) -> usize {
        (params.f as usize + 1) * n / params.p
    }
}

pub fn select_sources(g: &Graph, params: Alg1Params) -> Result<Selection, SpannerError> {
    Ok(SourceSelector::new(g, params)?.finish())
}

/// Size breakdown of one construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alg1Stats {
    pub n: usize,
    pub p: usize,
    pub f: u32,
    pub fault_kind: FaultKind,
    pub factory: FactoryKind,
    pub sources: usize,
    pub source_bound: usize,
    pub e1_edges: usize,
    pub white_vertices: usize,
    pub black_vertices: usize,
    pub white_edges: usize,
    /// Size of the sourcewise structure over the red vertices.
    pub sourcewise_edges: usize,
    pub total_edges: usize,
    pub counter_drops: Vec<u64>,
}

pub fn build_alg1_spanner(
    g: &Graph,
    params: Alg1Params,
    factory: &mut SourcewiseFactory,
) -> Result<(Spanner, Alg1Stats), SpannerError> {
    if factory.fault_kind != params.fault_kind {
        return Err(SpannerError::Claim(format!(
            "factory handles {} faults but {} faults were requested",
            factory.fault_kind, params.fault_kind
        )));
    }
    if factory.fault_budget() < params.f {
        return Err(SpannerError::Claim(format!(
            "factory tolerates {} fault(s), f={} requested",
            factory.fault_budget(),
            params.f
        )));
    }
    let selection = select_sources(g, params)?;
    let sourcewise = factory.build(g, &selection.sources)?;
    let white = |v: Vertex| selection.state.color[v] == Color::White;
    let mut mask = sourcewise.mask(g);
    let mut white_edges = 0;
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if white(u) || white(v) {
            mask[e] = true;
            white_edges += 1;
        }
    }
    for &e in &selection.e1 {
        mask[e] = true;
    }
    let beta = factory.beta() + 2;
    let spanner = Spanner::from_mask(
        g,
        &mask,
        Claim::new(1, beta, params.f, params.fault_kind.into()),
        format!("alg1(p={},f={},kind={},factory={})", params.p, params.f, params.fault_kind, factory.kind),
    )?;
    let stats = Alg1Stats {
        n: g.n(),
        p: params.p,
        f: params.f,
        fault_kind: params.fault_kind,
        factory: factory.kind,
        sources: selection.sources.len(),
        source_bound: Selection::source_bound(g.n(), &params),
        e1_edges: selection.e1.len(),
        white_vertices: selection.state.count(Color::White),
        black_vertices: selection.state.count(Color::Black),
        white_edges,
        sourcewise_edges: sourcewise.size(),
        total_edges: spanner.size(),
        counter_drops: selection.steps.iter().map(|s| s.counter_drop).collect(),
    };
    Ok((spanner, stats))
}
