//! Command-line front end. Each subcommand reads plain-text graph and
//! community files, writes its outputs, and records a JSON run manifest
//! next to them.
//!
//! Exit codes: 0 on success, 1 on a runtime error, 2 on a usage error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{
    core_periphery_profile, degeneracy_report, ensemble_degeneracy, runtime_ratio, stable_communities, write_csv,
    EnsembleMethod, ReportRow, StableConfig,
};
use crate::benchgen::{gen_disjoint, gen_fuzzy, gen_overlapping, BenchConfig};
use crate::community::{
    format_cover, format_fuzzy, format_partition, Cover, FuzzyAssignment, Partition, RawCover, RawFuzzy,
    RawPartition,
};
use crate::detectors::{BaseDetector, DetectorKind};
use crate::endisco::{endisco_from_base, Involvement, Similarity};
use crate::ensemble::{consensus_from_base, default_k, generate_base_solutions, BaseSolutionSet, ConsensusConfig, DEFAULT_K_CAP};
use crate::error::{Error, Result};
use crate::graph::{format_edge_list, load_edge_list, Graph, SymbolTable};
use crate::medoc::{Association, Matching, MedocModel, MedocOutput, Mode};
use crate::metrics::{ari, fuzzy_rand, nmi, omega, onmi, Metric};
use crate::selection::{select_combined, select_vrrw, size_from_fraction, Scoreboard, Strategy, VrrwParams};

/// Ensemble community detection over many vertex orderings.
#[derive(Debug, Parser)]
#[command(name = "comm-ensemble", version = concat!(env!("CARGO_PKG_VERSION"), " (", env!("CARGO_PKG_NAME"), ")"))]
pub struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted benchmark graph with ground truth.
    Generate(GenerateArgs),
    /// Run base detectors over random vertex orderings.
    Detect(DetectArgs),
    /// Disjoint ensemble through posterior membership profiles.
    Endisco(EndiscoArgs),
    /// Disjoint, overlapping or fuzzy ensemble through meta-communities.
    Medoc(MedocArgs),
    /// Consensus-clustering baseline.
    Consensus(ConsensusArgs),
    /// Compare two community structures; prints one number.
    Evaluate(EvaluateArgs),
    /// Keep a subset of a base solution set.
    Select(SelectArgs),
    /// Post-hoc studies emitted as long-format CSV.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchKind {
    Disjoint,
    Overlapping,
    Fuzzy,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value = "disjoint")]
    pub kind: BenchKind,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 20.0)]
    pub k_avg: f64,
    #[arg(long, default_value_t = 50)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0.3)]
    pub mu: f64,
    #[arg(long, default_value_t = 20)]
    pub c_min: usize,
    #[arg(long, default_value_t = 100)]
    pub c_max: usize,
    /// Fraction of overlapping vertices (overlapping kind only).
    #[arg(long, default_value_t = 0.1)]
    pub on: f64,
    /// Memberships per overlapping vertex (overlapping kind only).
    #[arg(long, default_value_t = 2)]
    pub om: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving graph.txt, truth.{part,cover,fuzzy} and stats.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Where base solutions come from: a saved set, or fresh detector runs.
#[derive(Debug, Args)]
pub struct BaseArgs {
    /// Saved base solution set (directory written by `detect`).
    #[arg(long)]
    pub base: Option<PathBuf>,
    /// Comma-separated detectors for fresh runs.
    #[arg(long, value_delimiter = ',', default_value = "louvain,lpa,cnm,walktrap")]
    pub detectors: Vec<DetectorKind>,
    /// Orderings per detector; default `min(ceil(0.2 n), 50)`.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub base: BaseArgs,
    /// Directory receiving the base solution set.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EndiscoArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub base: BaseArgs,
    #[arg(long, default_value = "rcc")]
    pub inv: Involvement,
    #[arg(long, default_value = "cos")]
    pub sim: Similarity,
    /// Re-clustering detector.
    #[arg(long, default_value = "louvain")]
    pub ralgo: DetectorKind,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MedocArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub base: BaseArgs,
    #[arg(long, default_value = "disjoint")]
    pub mode: Mode,
    #[arg(long = "match", default_value = "jc")]
    pub matching: Matching,
    #[arg(long, default_value = "weighted")]
    pub assoc: Association,
    /// Meta-clustering detector.
    #[arg(long, default_value = "louvain")]
    pub ralgo: DetectorKind,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConsensusArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub base: BaseArgs,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 10)]
    pub max_rounds: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FileFormat {
    Partition,
    Cover,
    Fuzzy,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub metric: Metric,
    pub truth: PathBuf,
    pub detected: PathBuf,
    /// Graph fixing the vertex set; otherwise the union of both files.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Format of the truth file; defaults to what the metric compares.
    #[arg(long, value_enum)]
    pub truth_format: Option<FileFormat>,
    #[arg(long, value_enum)]
    pub detected_format: Option<FileFormat>,
    /// Also write a run manifest here.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long, default_value = "vrrw")]
    pub strategy: Strategy,
    /// Size of the selection as a fraction of the full set.
    #[arg(long, default_value_t = 0.6)]
    pub s_frac: f64,
    /// Quality weight of the combined objective.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Reinforcement weight of the random walk.
    #[arg(long, default_value_t = 0.9)]
    pub lambda: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(subcommand)]
    pub study: Study,
}

#[derive(Debug, Subcommand)]
pub enum Study {
    /// Shell tier × association bucket counts of MeDOC++ communities.
    Shells {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        base: BaseArgs,
        /// `disjoint` or `overlapping` communities are profiled.
        #[arg(long, default_value = "disjoint")]
        mode: Mode,
        #[arg(long, default_value = "louvain")]
        ralgo: DetectorKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fully associated vertices across consecutive snapshots.
    Stable {
        /// Snapshot edge lists in time order.
        #[arg(long, num_args = 2.., required = true)]
        snapshots: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "louvain,lpa,cnm,walktrap")]
        detectors: Vec<DetectorKind>,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "louvain")]
        ralgo: DetectorKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise similarity of solutions across orderings.
    Degeneracy {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "louvain,lpa,cnm,walktrap")]
        detectors: Vec<DetectorKind>,
        /// Ensembles to include besides the standalone detectors.
        #[arg(long, value_delimiter = ',', default_value = "endisco,medoc")]
        ensembles: Vec<EnsembleMethod>,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        /// Orderings per detector inside each ensemble run.
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "louvain")]
        ralgo: DetectorKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ensemble wall-clock relative to the base runs (median of repeats).
    Runtime {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "louvain,lpa,cnm,walktrap")]
        detectors: Vec<DetectorKind>,
        #[arg(long, value_delimiter = ',', default_value = "endisco,medoc,consensus")]
        methods: Vec<EnsembleMethod>,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "louvain")]
        ralgo: DetectorKind,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct StageRecord {
    name: String,
    seconds: f64,
}

/// Provenance of one CLI run. Apart from `stages`, two runs with the same
/// arguments produce identical manifests.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    tool: String,
    version: String,
    command: String,
    argv: Vec<String>,
    settings: Value,
    seeds: BTreeMap<String, u64>,
    inputs: Vec<InputRecord>,
    stages: Vec<StageRecord>,
    outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            argv: argv.to_vec(),
            settings: Value::Null,
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            stages: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputRecord {
            path: path.display().to_string(),
            sha256: hash_path(path)?,
        });
        Ok(())
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.to_string(), seed);
    }

    /// Runs `f`, recording its wall-clock time under `name`.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.stages.push(StageRecord {
            name: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &(serde_json::to_string_pretty(self)? + "\n"))
    }
}

/// SHA-256 of a file, or of a directory's files (name and contents) in
/// name order, leaving out any run manifest.
fn hash_path(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            // the run manifest holds timings, so it would break reproducible hashes
            .filter(|p| p.is_file() && p.file_name().is_some_and(|n| n != DIR_MANIFEST))
            .collect();
        entries.sort();
        for p in entries {
            hasher.update(p.file_name().unwrap_or_default().as_encoded_bytes());
            hasher.update(fs::read(&p).map_err(|e| Error::io(&p, e))?);
        }
    } else {
        let mut buf = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::io(path, e))?;
        hasher.update(&buf);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Manifest path for a file output: `<out>.manifest.json`.
fn manifest_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

const DIR_MANIFEST: &str = "run_manifest.json";

fn build(kinds: &[DetectorKind]) -> Vec<Box<dyn BaseDetector>> {
    kinds.iter().map(|k| k.build()).collect()
}

fn kind_names(kinds: &[DetectorKind]) -> Vec<&'static str> {
    kinds.iter().map(|k| k.as_str()).collect()
}

/// Loads or generates the base set. Detectors of a loaded set are rebuilt
/// from its recorded algorithm names.
fn obtain_base(
    g: &Graph,
    args: &BaseArgs,
    manifest: &mut RunManifest,
) -> Result<(BaseSolutionSet, Vec<Box<dyn BaseDetector>>)> {
    manifest.seed("seed", args.seed);
    match &args.base {
        Some(dir) => {
            manifest.input(dir)?;
            let base = manifest.stage("load_base", || BaseSolutionSet::load(dir, g.symbols()))?;
            let kinds = base
                .algorithms()
                .iter()
                .map(|a| a.parse())
                .collect::<Result<Vec<DetectorKind>>>()?;
            Ok((base, build(&kinds)))
        }
        None => {
            let detectors = build(&args.detectors);
            let k = args.k.unwrap_or_else(|| default_k(g.n(), DEFAULT_K_CAP));
            let base = manifest.stage("base_solutions", || generate_base_solutions(g, &detectors, k, args.seed))?;
            Ok((base, detectors))
        }
    }
}

fn base_settings(args: &BaseArgs) -> Value {
    json!({
        "base": args.base.as_ref().map(|p| p.display().to_string()),
        "detectors": kind_names(&args.detectors),
        "k": args.k,
        "seed": args.seed,
    })
}

fn load_graph(path: &Path, manifest: &mut RunManifest) -> Result<Graph> {
    manifest.input(path)?;
    manifest.stage("load_graph", || load_edge_list(path))
}

fn cmd_generate(a: &GenerateArgs, argv: &[String]) -> Result<()> {
    let mut m = RunManifest::new("generate", argv);
    let cfg = BenchConfig {
        n: a.n,
        k_avg: a.k_avg,
        k_max: a.k_max,
        mu: a.mu,
        c_min: a.c_min,
        c_max: a.c_max,
        on: if a.kind == BenchKind::Overlapping { a.on } else { 0.0 },
        om: if a.kind == BenchKind::Overlapping { a.om } else { 1 },
        seed: a.seed,
        ..BenchConfig::default()
    };
    m.settings = json!({ "kind": format!("{:?}", a.kind).to_lowercase(), "config": &cfg });
    m.seed("seed", a.seed);
    let graph_path = a.out_dir.join("graph.txt");
    let stats_path = a.out_dir.join("stats.json");
    let (g, truth_path, truth_text, stats) = m.stage("generate", || {
        Ok(match a.kind {
            BenchKind::Disjoint => {
                let (g, p, s) = gen_disjoint(&cfg)?;
                let t = format_partition(&p, g.symbols());
                (g, a.out_dir.join("truth.part"), t, s)
            }
            BenchKind::Overlapping => {
                let (g, c, s) = gen_overlapping(&cfg)?;
                let t = format_cover(&c, g.symbols());
                (g, a.out_dir.join("truth.cover"), t, s)
            }
            BenchKind::Fuzzy => {
                let (g, f, s) = gen_fuzzy(&cfg)?;
                let t = format_fuzzy(&f, g.symbols());
                (g, a.out_dir.join("truth.fuzzy"), t, s)
            }
        })
    })?;
    write_file(&graph_path, &format_edge_list(&g))?;
    write_file(&truth_path, &truth_text)?;
    write_file(&stats_path, &(serde_json::to_string_pretty(&stats)? + "\n"))?;
    for p in [&graph_path, &truth_path, &stats_path] {
        m.output(p);
    }
    m.write(&a.out_dir.join(DIR_MANIFEST))
}

fn cmd_detect(a: &DetectArgs, argv: &[String]) -> Result<()> {
    let mut m = RunManifest::new("detect", argv);
    m.settings = base_settings(&a.base);
    let g = load_graph(&a.graph, &mut m)?;
    let (base, _) = obtain_base(&g, &a.base, &mut m)?;
    base.save(&a.out_dir, g.symbols())?;
    m.output(&a.out_dir);
    m.write(&a.out_dir.join(DIR_MANIFEST))
}

fn cmd_endisco(a: &EndiscoArgs, argv: &[String]) -> Result<()> {
    let mut m = RunManifest::new("endisco", argv);
    m.settings = json!({
        "base": base_settings(&a.base),
        "inv": a.inv.to_string(),
        "sim": a.sim.to_string(),
        "ralgo": a.ralgo.as_str(),
    });
    let g = load_graph(&a.graph, &mut m)?;
    let (base, _) = obtain_base(&g, &a.base, &mut m)?;
    let ralgo = a.ralgo.build();
    let p = m.stage("endisco", || endisco_from_base(&g, &base, a.inv, a.sim, ralgo.as_ref(), a.base.seed))?;
    write_file(&a.out, &format_partition(&p, g.symbols()))?;
    m.output(&a.out);
    m.write(&manifest_for(&a.out))
}

fn cmd_medoc(a: &MedocArgs, argv: &[String]) -> Result<()> {
    let mut m = RunManifest::new("medoc", argv);
    m.settings = json!({
        "base": base_settings(&a.base),
        "mode": a.mode.to_string(),
        "match": a.matching.to_string(),
        "assoc": a.assoc.to_string(),
        "ralgo": a.ralgo.as_str(),
    });
    let g = load_graph(&a.graph, &mut m)?;
    let (base, _) = obtain_base(&g, &a.base, &mut m)?;
    let ralgo = a.ralgo.build();
    let model = m.stage("meta_cluster", || MedocModel::fit(&base, a.matching, a.assoc, ralgo.as_ref(), a.base.seed))?;
    let out = m.stage("extract", || model.extract(&g, a.mode))?;
    let text = match &out {
        MedocOutput::Disjoint(p) => format_partition(p, g.symbols()),
        MedocOutput::Overlapping(c) => format_cover(c, g.symbols()),
        MedocOutput::Fuzzy(f) => format_fuzzy(f, g.symbols()),
    };
    write_file(&a.out, &text)?;
    m.output(&a.out);
    m.write(&manifest_for(&a.out))
}

fn cmd_consensus(a: &ConsensusArgs, argv: &[String]) -> Result<()> {
    let mut m = RunManifest::new("consensus", argv);
    m.settings = json!({
        "base": base_settings(&a.base),
        "threshold": a.threshold,
        "max_rounds": a.max_rounds,
    });
    let g = load_graph(&a.graph, &mut m)?;
    let (base, detectors) = obtain_base(&g, &a.base, &mut m)?;
    let cfg = ConsensusConfig {
        threshold: a.threshold,
        max_rounds: a.max_rounds,
    };
    let outcome = m.stage("consensus", || consensus_from_base(&base, &detectors, a.base.seed, &cfg))?;
    m.settings["converged"] = json!(outcome.converged);
    m.settings["rounds"] = json!(outcome.rounds);
    write_file(&a.out, &format_partition(&outcome.partition, g.symbols()))?;
    m.output(&a.out);
    m.write(&manifest_for(&a.out))
}

enum Structure {
    Partition(Partition),
    Cover(Cover),
    Fuzzy(FuzzyAssignment),
}

enum RawStructure {
    Partition(RawPartition),
    Cover(RawCover),
    Fuzzy(RawFuzzy),
}

impl RawStructure {
    fn read(path: &Path, format: FileFormat) -> Result<Self> {
        Ok(match format {
            FileFormat::Partition => RawStructure::Partition(RawPartition::read(path)?),
            FileFormat::Cover => RawStructure::Cover(RawCover::read(path)?),
            FileFormat::Fuzzy => RawStructure::Fuzzy(RawFuzzy::read(path)?),
        })
    }

    fn names(&self) -> Vec<&str> {
        match self {
            RawStructure::Partition(r) => r.vertex_names().collect(),
            RawStructure::Cover(r) => r.vertex_names().collect(),
            RawStructure::Fuzzy(r) => r.vertex_names().collect(),
        }
    }

    fn resolve(&self, symbols: &SymbolTable) -> Result<Structure> {
        Ok(match self {
            RawStructure::Partition(r) => Structure::Partition(r.resolve(symbols)?),
            RawStructure::Cover(r) => Structure::Cover(r.resolve(symbols)?),
            RawStructure::Fuzzy(r) => Structure::Fuzzy(r.resolve(symbols)?),
        })
    }
}

impl Structure {
    fn partition(self) -> Result<Partition> {
        match self {
            Structure::Partition(p) => Ok(p),
            _ => Err(Error::invalid("this metric compares partitions")),
        }
    }

    fn cover(self) -> Result<Cover> {
        match self {
            Structure::Partition(p) => Ok(Cover::from_partition(&p)),
            Structure::Cover(c) => Ok(c),
            Structure::Fuzzy(_) => Err(Error::invalid("this metric compares covers")),
        }
    }

    fn fuzzy(self) -> Result<FuzzyAssignment> {
        match self {
            Structure::Partition(p) => Ok(FuzzyAssignment::from_partition(&p)),
            Structure::Fuzzy(f) => Ok(f),
            Structure::Cover(_) => Err(Error::invalid("this metric compares fuzzy assignments")),
        }
    }
}

fn default_format(metric: Metric) -> FileFormat {
    match metric {
        Metric::Nmi | Metric::Ari => FileFormat::Partition,
        Metric::Onmi | Metric::Omega => FileFormat::Cover,
        Metric::FuzzyRand => FileFormat::Fuzzy,
    }
}

/// Scores `detected` against `truth`.
pub fn evaluate_files(a: &EvaluateArgs) -> Result<f64> {
    let truth = RawStructure::read(&a.truth, a.truth_format.unwrap_or(default_format(a.metric)))?;
    let detected = RawStructure::read(&a.detected, a.detected_format.unwrap_or(default_format(a.metric)))?;
    let symbols = match &a.graph {
        Some(g) => load_edge_list(g)?.symbols().clone(),
        None => {
            let mut names: Vec<&str> = truth.names();
            names.extend(detected.names());
            SymbolTable::from_tokens(names)
        }
    };
    let (t, d) = (truth.resolve(&symbols)?, detected.resolve(&symbols)?);
    match a.metric {
        Metric::Nmi => nmi(&t.partition()?, &d.partition()?),
        Metric::Ari => ari(&t.partition()?, &d.partition()?),
        Metric::Onmi => onmi(&t.cover()?, &d.cover()?),
        Metric::Omega => omega(&t.cover()?, &d.cover()?),
        Metric::FuzzyRand => fuzzy_rand(&t.fuzzy()?, &d.fuzzy()?),
    }
}

fn cmd_evaluate(a: &EvaluateArgs, argv: &[String]) -> Result<()> {
    let mut m = RunManifest::new("evaluate", argv);
    let value = m.stage("evaluate", || evaluate_files(a))?;
    println!("{value:?}");
    if let Some(path) = &a.manifest {
        m.settings = json!({ "metric": format!("{:?}", a.metric).to_lowercase(), "value": value });
        m.input(&a.truth)?;
        m.input(&a.detected)?;
        m.write(path)?;
    }
    Ok(())
}

fn cmd_select(a: &SelectArgs, argv: &[String]) -> Result<()> {
    let mut m = RunManifest::new("select", argv);
    m.settings = json!({
        "strategy": a.strategy.to_string(),
        "s_frac": a.s_frac,
        "alpha": a.alpha,
        "lambda": a.lambda,
    });
    let g = load_graph(&a.graph, &mut m)?;
    m.input(&a.base)?;
    let base = BaseSolutionSet::load(&a.base, g.symbols())?;
    let board = m.stage("score", || Scoreboard::from_solutions(&base))?;
    let s = size_from_fraction(a.s_frac, base.len());
    let chosen = match a.strategy {
        Strategy::Combined => select_combined(&board, s, a.alpha),
        Strategy::Vrrw => select_vrrw(
            &board,
            s,
            &VrrwParams {
                lambda: a.lambda,
                ..VrrwParams::default()
            },
        ),
        other => crate::selection::select(&board, other, s),
    };
    m.settings["selected"] = json!(chosen);
    base.subset(&chosen)?.save(&a.out_dir, g.symbols())?;
    m.output(&a.out_dir);
    m.write(&a.out_dir.join(DIR_MANIFEST))
}

fn cmd_analyze(a: &AnalyzeArgs, argv: &[String]) -> Result<()> {
    let mut m = RunManifest::new("analyze", argv);
    let (rows, out): (Vec<ReportRow>, &PathBuf) = match &a.study {
        Study::Shells {
            graph,
            base,
            mode,
            ralgo,
            out,
        } => {
            m.settings = json!({ "study": "shells", "base": base_settings(base), "mode": mode.to_string(), "ralgo": ralgo.as_str() });
            let g = load_graph(graph, &mut m)?;
            let (set, _) = obtain_base(&g, base, &mut m)?;
            let model = MedocModel::fit(&set, Matching::default(), Association::default(), ralgo.build().as_ref(), base.seed)?;
            let communities = match model.extract(&g, *mode)? {
                MedocOutput::Disjoint(p) => p.communities(),
                MedocOutput::Overlapping(c) => c.communities(),
                MedocOutput::Fuzzy(_) => return Err(Error::invalid("shell profiles need disjoint or overlapping communities")),
            };
            let profile = m.stage("profile", || core_periphery_profile(&g, &communities, &model.association))?;
            (profile.rows("medoc"), out)
        }
        Study::Stable {
            snapshots,
            detectors,
            k,
            seed,
            ralgo,
            out,
        } => {
            m.settings = json!({ "study": "stable", "detectors": kind_names(detectors), "k": k, "ralgo": ralgo.as_str() });
            m.seed("seed", *seed);
            let graphs = snapshots
                .iter()
                .map(|p| load_graph(p, &mut m))
                .collect::<Result<Vec<_>>>()?;
            let cfg = StableConfig {
                k: *k,
                matching: Matching::default(),
                assoc: Association::default(),
            };
            let report = m.stage("stable", || stable_communities(&graphs, &build(detectors), ralgo.build().as_ref(), &cfg, *seed))?;
            (report.rows("medoc"), out)
        }
        Study::Degeneracy {
            graph,
            detectors,
            ensembles,
            runs,
            k,
            seed,
            ralgo,
            out,
        } => {
            m.settings = json!({
                "study": "degeneracy",
                "detectors": kind_names(detectors),
                "ensembles": ensembles.iter().map(|e| e.name()).collect::<Vec<_>>(),
                "runs": runs,
                "k": k,
                "ralgo": ralgo.as_str(),
            });
            m.seed("seed", *seed);
            let g = load_graph(graph, &mut m)?;
            let dets = build(detectors);
            let mut rows = Vec::new();
            for (name, s) in m.stage("detectors", || degeneracy_report(&g, &dets, *runs, *seed))? {
                rows.extend(s.rows(&name));
            }
            for e in ensembles {
                let s = m.stage(e.name(), || ensemble_degeneracy(&g, *e, &dets, ralgo.build().as_ref(), *k, *runs, *seed))?;
                rows.extend(s.rows(e.name()));
            }
            (rows, out)
        }
        Study::Runtime {
            graph,
            detectors,
            methods,
            k,
            repeats,
            seed,
            ralgo,
            out,
        } => {
            m.settings = json!({
                "study": "runtime",
                "detectors": kind_names(detectors),
                "methods": methods.iter().map(|e| e.name()).collect::<Vec<_>>(),
                "k": k,
                "repeats": repeats,
                "ralgo": ralgo.as_str(),
            });
            m.seed("seed", *seed);
            let g = load_graph(graph, &mut m)?;
            let dets = build(detectors);
            let mut rows = Vec::new();
            for e in methods {
                let mut thetas = (0..(*repeats).max(1))
                    .map(|_| runtime_ratio(&g, *e, &dets, ralgo.build().as_ref(), *k, *seed).map(|r| r.theta))
                    .collect::<Result<Vec<_>>>()?;
                thetas.sort_by(f64::total_cmp);
                rows.push(ReportRow::new(e.name(), "theta_median", thetas[thetas.len() / 2]));
            }
            (rows, out)
        }
    };
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    write_file(out, &String::from_utf8_lossy(&buf))?;
    m.output(out);
    m.write(&manifest_for(out))
}

/// Parses `argv` and runs the subcommand; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        // fails only if a pool already exists, e.g. on a second call in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let echo: Vec<String> = argv.iter().map(|s| s.to_string_lossy().into_owned()).collect();
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a, &echo),
        Command::Detect(a) => cmd_detect(a, &echo),
        Command::Endisco(a) => cmd_endisco(a, &echo),
        Command::Medoc(a) => cmd_medoc(a, &echo),
        Command::Consensus(a) => cmd_consensus(a, &echo),
        Command::Evaluate(a) => cmd_evaluate(a, &echo),
        Command::Select(a) => cmd_select(a, &echo),
        Command::Analyze(a) => cmd_analyze(a, &echo),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["comm-ensemble", "no-such-command"]), 2);
        assert_eq!(run(["comm-ensemble", "endisco", "--inv", "bogus", "--graph", "g", "--out", "o"]), 2);
        assert_eq!(run(["comm-ensemble", "--version"]), 0);
    }

    #[test]
    fn missing_input_exits_one() {
        assert_eq!(run(["comm-ensemble", "evaluate", "--metric", "nmi", "/nonexistent/a", "/nonexistent/b"]), 1);
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(manifest_for(Path::new("out/x.part")), PathBuf::from("out/x.part.manifest.json"));
    }
}
