//! Named construction pipelines, the experiment runner, and result rows.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alg1::{build_alg1_spanner, recommended_p, Alg1Params};
use crate::alg2::build_alg2_spanner;
use crate::base::{acim_2additive, bkmp_6additive, greedy_multiplicative};
use crate::ft_blocks::{eft_multiplicative, FactoryKind, SourcewiseFactory};
use crate::generate::{generate, GenerateError, GeneratorSpec};
use crate::graph::{FaultKind, Graph};
use crate::oracle::{verify, VerifyError, VerifyMode, Witness, DEFAULT_BUDGET};
use crate::spanner::{Clustering, Spanner, SpannerError};
use crate::union::{stretch_claim, union_spanner};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Spanner(#[from] SpannerError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed row: {0}")]
    Row(String),
    #[error("no rows")]
    NoRows,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Acim2,
    Bkmp6,
}

impl BaseKind {
    pub fn build(self, g: &Graph) -> Result<(Spanner, Clustering), SpannerError> {
        match self {
            BaseKind::Acim2 => acim_2additive(g),
            BaseKind::Bkmp6 => bkmp_6additive(g),
        }
    }
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseKind::Acim2 => "acim2",
            BaseKind::Bkmp6 => "bkmp6",
        })
    }
}

impl FromStr for BaseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "acim2" => Ok(BaseKind::Acim2),
            "bkmp6" => Ok(BaseKind::Bkmp6),
            other => Err(format!("unknown base spanner `{other}` (expected acim2 or bkmp6)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Greedy,
    EftMult,
    Acim2,
    Bkmp6,
    Alg1Preserver,
    #[serde(rename = "alg1-2additive")]
    Alg1TwoAdditive,
    Alg2,
    UnionF,
}

impl Pipeline {
    pub const ALL: [Pipeline; 8] = [
        Pipeline::Greedy,
        Pipeline::EftMult,
        Pipeline::Acim2,
        Pipeline::Bkmp6,
        Pipeline::Alg1Preserver,
        Pipeline::Alg1TwoAdditive,
        Pipeline::Alg2,
        Pipeline::UnionF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Greedy => "greedy",
            Pipeline::EftMult => "eft-mult",
            Pipeline::Acim2 => "acim2",
            Pipeline::Bkmp6 => "bkmp6",
            Pipeline::Alg1Preserver => "alg1-preserver",
            Pipeline::Alg1TwoAdditive => "alg1-2additive",
            Pipeline::Alg2 => "alg2",
            Pipeline::UnionF => "union-f",
        }
    }
}

/// A pipeline with its parameters. Unset parameters take per-pipeline
/// defaults when built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub pipeline: Pipeline,
    pub p: Option<usize>,
    pub k: Option<u32>,
    pub faults: u32,
    pub fault_kind: FaultKind,
    pub base: BaseKind,
}

impl PipelineSpec {
    pub fn new(pipeline: Pipeline) -> Self {
        let base = if pipeline == Pipeline::Alg2 { BaseKind::Bkmp6 } else { BaseKind::Acim2 };
        Self { pipeline, p: None, k: None, faults: 1, fault_kind: FaultKind::Edge, base }
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_faults(mut self, f: u32) -> Self {
        self.faults = f;
        self
    }

    pub fn with_kind(mut self, kind: FaultKind) -> Self {
        self.fault_kind = kind;
        self
    }

    pub fn with_base(mut self, base: BaseKind) -> Self {
        self.base = base;
        self
    }

    /// Label used in the `construction` column.
    pub fn label(&self) -> String {
        match self.pipeline {
            Pipeline::Alg2 => format!("alg2-{}", self.base),
            p => p.name().to_string(),
        }
    }

    fn default_k(&self) -> u32 {
        match self.pipeline {
            Pipeline::Alg2 => 3,
            _ => 2,
        }
    }
}

impl FromStr for PipelineSpec {
    type Err = String;

    /// Accepts a pipeline name; `alg2-acim2` and `alg2-bkmp6` also fix the base.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alg2-acim2" => return Ok(PipelineSpec::new(Pipeline::Alg2).with_base(BaseKind::Acim2)),
            "alg2-bkmp6" => return Ok(PipelineSpec::new(Pipeline::Alg2)),
            _ => {}
        }
        Pipeline::ALL.into_iter().find(|p| p.name() == s).map(PipelineSpec::new).ok_or_else(|| {
            let names: Vec<&str> = Pipeline::ALL.iter().map(|p| p.name()).collect();
            format!("unknown pipeline `{s}` (expected one of {}, alg2-acim2, alg2-bkmp6)", names.join(", "))
        })
    }
}

/// A built spanner with the parameters actually used.
#[derive(Clone, Debug)]
pub struct Built {
    pub spanner: Spanner,
    /// `key=value` pairs joined by `;`.
    pub params: String,
    /// Construction-specific counters.
    pub stats: serde_json::Value,
}

pub fn build_pipeline(g: &Graph, spec: &PipelineSpec) -> Result<Built, SpannerError> {
    let k = spec.k.unwrap_or_else(|| spec.default_k());
    let f = spec.faults;
    let kind = spec.fault_kind;
    let need_edge = || {
        if kind == FaultKind::Vertex {
            Err(SpannerError::Claim(format!("{} only tolerates edge faults", spec.label())))
        } else {
            Ok(())
        }
    };
    let built = match spec.pipeline {
        Pipeline::Greedy => {
            Built { spanner: greedy_multiplicative(g, k)?, params: format!("k={k}"), stats: serde_json::Value::Null }
        }
        Pipeline::EftMult => {
            need_edge()?;
            Built {
                spanner: eft_multiplicative(g, k, f)?,
                params: format!("k={k};f={f}"),
                stats: serde_json::Value::Null,
            }
        }
        Pipeline::Acim2 | Pipeline::Bkmp6 => {
            let base = if spec.pipeline == Pipeline::Acim2 { BaseKind::Acim2 } else { BaseKind::Bkmp6 };
            let (spanner, c) = base.build(g)?;
            Built {
                spanner,
                params: format!("clusters={}", c.num_clusters()),
                stats: serde_json::json!({ "clusters": c.num_clusters() }),
            }
        }
        Pipeline::Alg1Preserver | Pipeline::Alg1TwoAdditive => {
            let factory_kind = if spec.pipeline == Pipeline::Alg1Preserver {
                FactoryKind::Preserver
            } else {
                FactoryKind::Augmented2Additive
            };
            let p = spec.p.unwrap_or_else(|| recommended_p(g.n(), factory_kind, kind));
            let mut factory = SourcewiseFactory::new(factory_kind, kind);
            let (spanner, stats) = build_alg1_spanner(g, Alg1Params { p, f, fault_kind: kind }, &mut factory)?;
            Built {
                spanner,
                params: format!("p={p};f={f};kind={kind}"),
                stats: serde_json::to_value(&stats).expect("stats serialize"),
            }
        }
        Pipeline::Alg2 => {
            need_edge()?;
            let (a, c) = spec.base.build(g)?;
            let m = eft_multiplicative(g, k, 1)?;
            let spanner = build_alg2_spanner(g, &a, &c, &m)?;
            Built {
                spanner,
                params: format!("base={};k={k}", spec.base),
                stats: serde_json::json!({ "base_edges": a.size(), "mult_edges": m.size(), "clusters": c.num_clusters() }),
            }
        }
        Pipeline::UnionF => {
            need_edge()?;
            let (a, _) = spec.base.build(g)?;
            let m = eft_multiplicative(g, k, f)?;
            let spanner = union_spanner(g, &a, &m)?;
            let (_, old) = stretch_claim(m.claim().alpha, a.claim().beta, f)?;
            Built {
                spanner,
                params: format!("base={};k={k};f={f};old_bound={old}", spec.base),
                stats: serde_json::json!({ "base_edges": a.size(), "mult_edges": m.size(), "old_bound": old }),
            }
        }
    };
    Ok(built)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub generator: GeneratorSpec,
    pub seeds: Vec<u64>,
    pub pipelines: Vec<PipelineSpec>,
    pub mode: VerifyMode,
    pub budget: u64,
    /// Fault sets sampled when an exhaustive run would exceed the budget.
    pub fallback_samples: usize,
    /// Off by default so identical specs give byte-identical output.
    pub record_timing: bool,
}

impl ExperimentSpec {
    pub fn new(generator: GeneratorSpec, seeds: Vec<u64>, pipelines: Vec<PipelineSpec>) -> Self {
        Self {
            generator,
            seeds,
            pipelines,
            mode: VerifyMode::Exhaustive,
            budget: DEFAULT_BUDGET,
            fallback_samples: 200,
            record_timing: false,
        }
    }
}

/// The comparison pipelines: exact preserver factory, augmented 2-additive
/// factory, cluster augmentation over the 6-additive base, and the
/// single-fault union over the same base.
pub fn comparison_pipelines() -> Vec<PipelineSpec> {
    vec![
        PipelineSpec::new(Pipeline::Alg1Preserver),
        PipelineSpec::new(Pipeline::Alg1TwoAdditive),
        PipelineSpec::new(Pipeline::Alg2),
        PipelineSpec::new(Pipeline::UnionF).with_base(BaseKind::Bkmp6).with_k(3),
    ]
}

/// One result row. The first nine fields are the CSV columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub m: usize,
    pub construction: String,
    pub params: String,
    pub spanner_edges: usize,
    pub claimed_beta: u32,
    /// Worst additive residue, `None` if nothing was measurable.
    pub observed_max_additive: Option<i64>,
    /// Whether some pair connected in `G - F` was cut in `H - F`.
    pub unbounded: bool,
    pub pass: bool,
    /// Milliseconds, or 0 when timing is off.
    pub wall_time: u64,
    #[serde(default)]
    pub witness: Option<Witness>,
}

pub const CSV_COLUMNS: [&str; 9] =
    ["n", "m", "construction", "params", "spanner_edges", "claimed_beta", "observed_max_additive", "pass", "wall_time"];

impl Row {
    fn observed(&self) -> String {
        match (self.unbounded, self.observed_max_additive) {
            (true, _) => "inf".into(),
            (false, Some(x)) => x.to_string(),
            (false, None) => String::new(),
        }
    }

    fn record(&self) -> [String; 9] {
        [
            self.n.to_string(),
            self.m.to_string(),
            self.construction.clone(),
            self.params.clone(),
            self.spanner_edges.to_string(),
            self.claimed_beta.to_string(),
            self.observed(),
            self.pass.to_string(),
            self.wall_time.to_string(),
        ]
    }
}

/// Builds and verifies one pipeline on one graph.
pub fn run_one(
    g: &Graph,
    seed: u64,
    spec: &PipelineSpec,
    mode: VerifyMode,
    budget: u64,
    fallback_samples: usize,
    record_timing: bool,
) -> Result<Row, ExperimentError> {
    let start = Instant::now();
    let built = build_pipeline(g, spec)?;
    let mut params = format!("seed={seed};{}", built.params);
    let report = match verify(g, &built.spanner, None, mode, budget) {
        Err(VerifyError::BudgetExceeded { .. }) => {
            let sampled = VerifyMode::Sampled { count: fallback_samples, seed };
            params.push_str(&format!(";verify=sampled({fallback_samples})"));
            verify(g, &built.spanner, None, sampled, budget)?
        }
        other => {
            if let VerifyMode::Sampled { count, .. } = mode {
                params.push_str(&format!(";verify=sampled({count})"));
            }
            other?
        }
    };
    let wall_time = if record_timing { start.elapsed().as_millis() as u64 } else { 0 };
    Ok(Row {
        n: g.n(),
        m: g.m(),
        construction: spec.label(),
        params,
        spanner_edges: built.spanner.size(),
        claimed_beta: built.spanner.claim().beta,
        observed_max_additive: report.max_additive,
        unbounded: report.counts.unbounded_pairs > 0,
        pass: report.pass,
        wall_time,
        witness: report.witness,
    })
}

/// Rows in spec order: seeds outermost, then pipelines.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<Row>, ExperimentError> {
    let mut rows = Vec::with_capacity(spec.seeds.len() * spec.pipelines.len());
    for &seed in &spec.seeds {
        let g = generate(&spec.generator, seed)?.graph;
        for p in &spec.pipelines {
            rows.push(run_one(&g, seed, p, spec.mode, spec.budget, spec.fallback_samples, spec.record_timing)?);
        }
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[Row]) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Row(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<Row>, ExperimentError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(ExperimentError::Row(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<u64, ExperimentError> {
            rec[i]
                .parse()
                .map_err(|_| ExperimentError::Row(format!("column {} is not a number: {:?}", CSV_COLUMNS[i], &rec[i])))
        };
        let (observed, unbounded) = match &rec[6] {
            "inf" => (None, true),
            "" => (None, false),
            x => (Some(x.parse().map_err(|_| ExperimentError::Row(format!("bad observed value {x:?}")))?), false),
        };
        rows.push(Row {
            n: num(0)? as usize,
            m: num(1)? as usize,
            construction: rec[2].to_string(),
            params: rec[3].to_string(),
            spanner_edges: num(4)? as usize,
            claimed_beta: num(5)? as u32,
            observed_max_additive: observed,
            unbounded,
            pass: rec[7].parse().map_err(|_| ExperimentError::Row(format!("bad pass value {:?}", &rec[7])))?,
            wall_time: num(8)?,
            witness: None,
        });
    }
    Ok(rows)
}

/// Plain-text summary: failing rows first (with witnesses when known),
/// then worst observed stretch against the claim per construction, then
/// the overall pass count.
pub fn report(rows: &[Row]) -> Result<String, ExperimentError> {
    if rows.is_empty() {
        return Err(ExperimentError::NoRows);
    }
    let mut out = String::new();
    for r in rows.iter().filter(|r| !r.pass) {
        out.push_str(&format!(
            "FAIL {} n={} m={} {}: observed {} > claim {}",
            r.construction,
            r.n,
            r.m,
            r.params,
            r.observed(),
            r.claimed_beta
        ));
        if let Some(w) = &r.witness {
            let dh = w.d_h.map_or("inf".to_string(), |d| d.to_string());
            out.push_str(&format!(" (s={} t={} F={:?} d_G={} d_H={dh})", w.s, w.t, w.faults, w.d_g));
        }
        out.push('\n');
    }
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.construction.as_str()) {
            names.push(&r.construction);
        }
    }
    out.push_str(&format!(
        "{:<18} {:>5} {:>9} {:>6} {:>6} {:>10}\n",
        "construction", "rows", "pass", "worst", "claim", "mean_edges"
    ));
    for name in names {
        let group: Vec<&Row> = rows.iter().filter(|r| r.construction == name).collect();
        let passed = group.iter().filter(|r| r.pass).count();
        let worst = if group.iter().any(|r| r.unbounded) {
            "inf".to_string()
        } else {
            group.iter().filter_map(|r| r.observed_max_additive).max().map_or("-".into(), |x| x.to_string())
        };
        let claims: Vec<u32> = group.iter().map(|r| r.claimed_beta).collect();
        let claim = match (claims.iter().min(), claims.iter().max()) {
            (Some(a), Some(b)) if a == b => a.to_string(),
            (Some(a), Some(b)) => format!("{a}-{b}"),
            _ => "-".into(),
        };
        let mean = group.iter().map(|r| r.spanner_edges).sum::<usize>() as f64 / group.len() as f64;
        out.push_str(&format!(
            "{:<18} {:>5} {:>9} {:>6} {:>6} {:>10.1}\n",
            name,
            group.len(),
            format!("{passed}/{}", group.len()),
            worst,
            claim,
            mean
        ));
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    out.push_str(&format!("{passed}/{} pass\n", rows.len()));
    Ok(out)
}

/// Least-squares slope of `ln(size)` against `ln(n)`.
pub fn fit_exponent(points: &[(usize, usize)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|&&(n, s)| n > 0 && s > 0).map(|&(n, s)| ((n as f64).ln(), (s as f64).ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Spanner sizes of one pipeline over a family of graphs, one per `n`,
/// without verification.
pub fn size_scaling(
    spec: &PipelineSpec,
    generator: impl Fn(usize) -> GeneratorSpec,
    ns: &[usize],
    seed: u64,
) -> Result<Vec<(usize, usize)>, ExperimentError> {
    ns.iter()
        .map(|&n| {
            let g = generate(&generator(n), seed)?.graph;
            Ok((g.n(), build_pipeline(&g, spec)?.spanner.size()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec::new(
            GeneratorSpec::Gnp { n: 30, prob: 0.2, connected: true },
            vec![1, 2],
            vec![
                PipelineSpec::new(Pipeline::Alg1Preserver),
                "alg2-bkmp6".parse().unwrap(),
                PipelineSpec::new(Pipeline::UnionF).with_faults(2),
            ],
        )
    }

    #[test]
    fn pipeline_names_round_trip() {
        for p in Pipeline::ALL {
            assert_eq!(p.name().parse::<PipelineSpec>().unwrap().pipeline, p);
        }
        assert_eq!("alg2-acim2".parse::<PipelineSpec>().unwrap().base, BaseKind::Acim2);
        assert_eq!("alg2".parse::<PipelineSpec>().unwrap().label(), "alg2-bkmp6");
        assert!("nope".parse::<PipelineSpec>().is_err());
    }

    #[test]
    fn experiment_is_deterministic_and_round_trips() {
        let spec = small_spec();
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        let csv_a = rows_to_csv(&a).unwrap();
        assert_eq!(csv_a, rows_to_csv(&b).unwrap());
        assert_eq!(a.len(), 6);
        assert!(a.iter().all(|r| r.pass), "{csv_a}");
        assert!(csv_a
            .starts_with("n,m,construction,params,spanner_edges,claimed_beta,observed_max_additive,pass,wall_time\n"));
        let back = rows_from_csv(&csv_a).unwrap();
        let strip = |rows: &[Row]| rows.iter().map(|r| Row { witness: None, ..r.clone() }).collect::<Vec<_>>();
        assert_eq!(back, strip(&a));
        assert_eq!(a[2].claimed_beta, 18);
    }

    #[test]
    fn vertex_faults_rejected_where_unsupported() {
        let g = generate(&GeneratorSpec::Petersen, 0).unwrap().graph;
        let spec = PipelineSpec::new(Pipeline::Alg2).with_kind(FaultKind::Vertex);
        assert!(build_pipeline(&g, &spec).is_err());
        let spec = PipelineSpec::new(Pipeline::Alg1Preserver).with_kind(FaultKind::Vertex);
        assert_eq!(build_pipeline(&g, &spec).unwrap().spanner.claim().beta, 2);
    }

    #[test]
    fn budget_overflow_falls_back_to_sampling() {
        let mut spec = small_spec();
        spec.seeds = vec![1];
        spec.pipelines = vec![PipelineSpec::new(Pipeline::UnionF).with_faults(2)];
        spec.budget = 1000;
        spec.fallback_samples = 10;
        let rows = run_experiment(&spec).unwrap();
        assert!(rows[0].params.ends_with("verify=sampled(10)"));
    }

    #[test]
    fn report_formats() {
        let row = Row {
            n: 10,
            m: 15,
            construction: "greedy".into(),
            params: "seed=1;k=2".into(),
            spanner_edges: 15,
            claimed_beta: 0,
            observed_max_additive: Some(0),
            unbounded: false,
            pass: true,
            wall_time: 0,
            witness: None,
        };
        let text = report(std::slice::from_ref(&row)).unwrap();
        assert!(text.ends_with("1/1 pass\n"));
        let bad = Row {
            construction: "alg2-bkmp6".into(),
            claimed_beta: 14,
            observed_max_additive: Some(16),
            pass: false,
            witness: Some(Witness { s: 1, t: 2, faults: vec![3], d_g: 2, d_h: Some(18) }),
            ..row.clone()
        };
        let text = report(&[row, bad]).unwrap();
        assert!(text.starts_with("FAIL alg2-bkmp6"));
        assert!(text.contains("s=1 t=2 F=[3]"));
        assert!(text.ends_with("1/2 pass\n"));
        assert!(matches!(report(&[]), Err(ExperimentError::NoRows)));
    }

    #[test]
    fn exponent_fit() {
        let pts: Vec<(usize, usize)> = [64usize, 128, 256, 512].iter().map(|&n| (n, n * n)).collect();
        assert!((fit_exponent(&pts).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(fit_exponent(&[(10, 5)]), None);
    }
}
