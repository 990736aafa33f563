use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ftspan::experiment::{
    build_pipeline, comparison_pipelines, report, rows_from_csv, rows_to_csv, run_experiment, BaseKind,
    ExperimentError, ExperimentSpec, PipelineSpec, Row,
};
use ftspan::generate::{generate, GeneratorSpec};
use ftspan::graph::{read_edge_list, write_edge_list, FaultKind, FaultSet, Graph, Vertex};
use ftspan::oracle::{verify, VerifyMode, DEFAULT_BUDGET};
use ftspan::spanner::Spanner;
use ftspan::union::decompose_blocks;

#[derive(Parser)]
#[command(name = "ftspan", version, about = "Fault-tolerant additive spanners with exhaustive verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it as an edge list.
    Gen {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a spanner and write it as JSON.
    Build {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a spanner's claim; exits 1 if the claim is violated.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        /// Spanner JSON from `build`; otherwise one is built from --pipeline.
        #[arg(long)]
        spanner: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        verify: VerifyArgs,
        /// Comma-separated source vertices restricting the checked pairs.
        #[arg(long, value_delimiter = ',')]
        sources: Option<Vec<Vertex>>,
        /// Report JSON output (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run pipelines over seeded graphs and write CSV rows.
    Experiment {
        #[command(flatten)]
        generator: GeneratorArgs,
        /// Seeds such as `1-20` or `1,4,9`.
        #[arg(long, default_value = "1")]
        seeds: String,
        /// Pipelines, comma-separated or repeated.
        #[arg(long, value_delimiter = ',')]
        pipeline: Vec<String>,
        /// Named pipeline set (`comparison`).
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        faults: Option<u32>,
        #[arg(long)]
        fault_kind: Option<FaultKind>,
        #[arg(long)]
        base: Option<BaseKind>,
        #[command(flatten)]
        verify: VerifyArgs,
        /// Record wall time per row (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
        /// CSV output (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Full rows with witnesses as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Summarize rows from a CSV or JSON rows file; exits 2 if no rows match.
    Report {
        rows: PathBuf,
        /// Only rows of this construction.
        #[arg(long)]
        construction: Option<String>,
    },
    /// Print the block decomposition of a post-fault shortest path.
    Decompose {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value = "acim2")]
        base: BaseKind,
        /// Failed edges as `u-v`, comma-separated.
        #[arg(long, value_delimiter = ',')]
        fail: Vec<String>,
        #[arg(long)]
        s: Vertex,
        #[arg(long)]
        t: Vertex,
    },
}

#[derive(Args)]
struct GeneratorArgs {
    /// gnp, random_regular, grid, path, cycle, complete or petersen.
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    prob: Option<f64>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Keep only the largest connected component (gnp).
    #[arg(long)]
    connected: bool,
}

impl GeneratorArgs {
    fn spec(&self) -> Result<GeneratorSpec> {
        let kind = self.generator.as_deref().ok_or_else(|| anyhow!("--generator is required"))?;
        let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| anyhow!("--generator {kind} needs --{flag}"));
        Ok(match kind {
            "gnp" => GeneratorSpec::Gnp {
                n: need(self.n, "n")?,
                prob: self.prob.ok_or_else(|| anyhow!("--generator gnp needs --prob"))?,
                connected: self.connected,
            },
            "random_regular" => {
                GeneratorSpec::RandomRegular { n: need(self.n, "n")?, degree: need(self.degree, "degree")? }
            }
            "grid" => GeneratorSpec::Grid { rows: need(self.rows, "rows")?, cols: need(self.cols, "cols")? },
            "path" => GeneratorSpec::Path { n: need(self.n, "n")? },
            "cycle" => GeneratorSpec::Cycle { n: need(self.n, "n")? },
            "complete" => GeneratorSpec::Complete { n: need(self.n, "n")? },
            "petersen" => GeneratorSpec::Petersen,
            other => bail!("unknown generator `{other}`"),
        })
    }
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file.
    #[arg(long, conflicts_with = "generator")]
    graph: Option<PathBuf>,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GraphArgs {
    fn load(&self) -> Result<Graph> {
        match &self.graph {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                read_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
            }
            None if self.generator.generator.is_some() => Ok(generate(&self.generator.spec()?, self.seed)?.graph),
            None => bail!("give --graph FILE or --generator KIND"),
        }
    }
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    pipeline: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value_t = 1)]
    faults: u32,
    #[arg(long, default_value = "edge")]
    fault_kind: FaultKind,
    #[arg(long)]
    base: Option<BaseKind>,
}

impl PipelineArgs {
    fn spec(&self) -> Result<PipelineSpec> {
        let name = self.pipeline.as_deref().ok_or_else(|| anyhow!("--pipeline is required"))?;
        let mut spec: PipelineSpec = name.parse().map_err(|e: String| anyhow!(e))?;
        spec.p = self.p;
        spec.k = self.k;
        spec.faults = self.faults;
        spec.fault_kind = self.fault_kind;
        if let Some(b) = self.base {
            spec.base = b;
        }
        Ok(spec)
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Check the empty fault set plus N random fault sets instead of all.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    sample_seed: u64,
    /// Ceiling on estimated BFS edge relaxations for exhaustive runs.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

impl VerifyArgs {
    fn mode(&self) -> VerifyMode {
        match self.sample {
            Some(count) => VerifyMode::Sampled { count, seed: self.sample_seed },
            None => VerifyMode::Exhaustive,
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Seeds like `1-5,9`.
fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
                if a > b {
                    bail!("empty seed range `{part}`");
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().with_context(|| format!("bad seed `{part}`"))?),
        }
    }
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn parse_edge(g: &Graph, text: &str) -> Result<usize> {
    let (u, v) = text.split_once('-').ok_or_else(|| anyhow!("expected an edge as `u-v`, got `{text}`"))?;
    let (u, v): (Vertex, Vertex) = (u.trim().parse()?, v.trim().parse()?);
    g.edge_id(u, v).ok_or_else(|| anyhow!("({u}, {v}) is not an edge"))
}

fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_str(&text)?)
    } else {
        Ok(rows_from_csv(&text)?)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { generator, seed, out } => {
            let generated = generate(&generator.spec()?, seed)?;
            let meta = serde_json::to_string(&generated.meta)?;
            emit(out.as_deref(), &format!("# {meta}\n{}", write_edge_list(&generated.graph)))?;
        }
        Command::Build { graph, pipeline, out } => {
            let g = graph.load()?;
            let spec = pipeline.spec()?;
            let built = build_pipeline(&g, &spec)?;
            let c = built.spanner.claim();
            eprintln!(
                "{}: {} of {} edges, claim alpha={} beta={} f={} ({})",
                spec.label(),
                built.spanner.size(),
                g.m(),
                c.alpha,
                c.beta,
                c.f,
                built.params
            );
            emit(out.as_deref(), &(built.spanner.to_json() + "\n"))?;
        }
        Command::Verify { graph, spanner, pipeline, verify: v, sources, out } => {
            let g = graph.load()?;
            let h = match spanner {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    Spanner::from_json(&text, &g)?
                }
                None => build_pipeline(&g, &pipeline.spec()?)?.spanner,
            };
            let rep = verify(&g, &h, sources.as_deref(), v.mode(), v.budget)?;
            let observed = match (rep.counts.unbounded_pairs, rep.max_additive) {
                (0, Some(x)) => x.to_string(),
                (0, None) => "-".into(),
                _ => "inf".into(),
            };
            eprintln!(
                "{}: observed {observed}, claim {} over {} fault sets, {} pairs",
                if rep.pass { "PASS" } else { "FAIL" },
                rep.claim.beta,
                rep.counts.fault_sets,
                rep.counts.pairs_checked
            );
            emit(out.as_deref(), &(rep.to_json() + "\n"))?;
            if !rep.pass {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Experiment {
            generator,
            seeds,
            pipeline,
            preset,
            p,
            k,
            faults,
            fault_kind,
            base,
            verify: v,
            timing,
            out,
            json,
        } => {
            let mut pipelines = match preset.as_deref() {
                Some("comparison") => comparison_pipelines(),
                Some(other) => bail!("unknown preset `{other}` (expected comparison)"),
                None => Vec::new(),
            };
            for name in &pipeline {
                pipelines.push(name.parse().map_err(|e: String| anyhow!(e))?);
            }
            if pipelines.is_empty() {
                bail!("give --pipeline or --preset");
            }
            for spec in &mut pipelines {
                spec.p = p.or(spec.p);
                spec.k = k.or(spec.k);
                spec.faults = faults.unwrap_or(spec.faults);
                spec.fault_kind = fault_kind.unwrap_or(spec.fault_kind);
                spec.base = base.unwrap_or(spec.base);
            }
            let mut spec = ExperimentSpec::new(generator.spec()?, parse_seeds(&seeds)?, pipelines);
            spec.mode = v.mode();
            spec.budget = v.budget;
            spec.record_timing = timing;
            let rows = run_experiment(&spec)?;
            emit(out.as_deref(), &rows_to_csv(&rows)?)?;
            if let Some(path) = json {
                fs::write(&path, serde_json::to_string_pretty(&rows)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            eprint!("{}", report(&rows)?);
            if rows.iter().any(|r| !r.pass) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Report { rows, construction } => {
            let mut rows = read_rows(&rows)?;
            if let Some(name) = construction {
                rows.retain(|r| r.construction == name);
            }
            match report(&rows) {
                Ok(text) => print!("{text}"),
                Err(ExperimentError::NoRows) => {
                    eprintln!("no rows");
                    return Ok(ExitCode::from(2));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Decompose { graph, base, fail, s, t } => {
            let g = graph.load()?;
            let ids = fail.iter().map(|e| parse_edge(&g, e)).collect::<Result<Vec<_>>>()?;
            let faults = FaultSet::edges(ids, &g)?;
            let (a, _) = base.build(&g)?;
            let dec = decompose_blocks(&g, &a, &faults, s, t)?;
            println!("{}", dec.to_json());
            if let Err(e) = dec.check(&g, &a) {
                bail!("decomposition failed its own check: {e}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
