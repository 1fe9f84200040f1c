//! Command-line experiment runner.
//!
//! Every per-command flag can also be set in an INI-style config file, either
//! in the section named after the command or in `[general]`. Flags win over
//! the file. CSV files are written to a temporary file in the output
//! directory and renamed into place.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use ini::Ini;
use rayon::prelude::*;

use crate::access::{
    replay, replay_cached, write_ledgers_csv, AlignmentConfig, ReadLedger, TransferMode,
    UNLIMITED_CACHE,
};
use crate::error::{Error, Result};
use crate::graph::{
    gen_kronecker_with_budget, gen_uniform_random_with_budget, load_csr, load_edge_list, write_csr,
    CsrGraph, Directedness, VertexId, DEFAULT_EDGE_BUDGET,
};
use crate::model::{
    optimal_transfer, predict_runtime_curve, requirements, slope, throughput, DeviceProfile,
    LinkProfile, CURVE_CSV_HEADER, MB_PER_S,
};
use crate::sim::{
    pointer_chase, sweep_row, write_sweep_csv, LatencySweepRow, RequestSize, SimConfig,
};
use crate::traversal::{bfs, pick_source, sssp, AccessTrace};
use crate::units::{
    parse_bandwidth, parse_bytes, parse_bytes_f64, parse_iops, parse_list, parse_time_ns,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

const DEFAULT_ALIGNMENTS: &str = "32,64,128,256,512,1024,2048,4096";
const DEFAULT_SIZES: &str = "32,64,128,256,512,1024,2048,4096,8192,16384,32768,65536";
const DEFAULT_DELTAS: &str = "0,500ns,1us,1.5us,2us,2.5us,3us";

#[derive(Parser, Debug)]
#[command(
    name = "extmem",
    version,
    about = "Graph traversal over external memory: read amplification, throughput model, and simulation"
)]
pub struct Cli {
    /// INI-style config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for generators, source choice and the simulator.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Parallel jobs for sweeps; 0 uses every core.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Leave out the `# generated` comment line in CSV files.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate or ingest a graph, save it as CSR and report degree stats.
    Gen(GenArgs),
    /// Run BFS and export its edge-list access trace.
    Bfs(TraverseArgs),
    /// Run frontier Bellman-Ford and export its access trace.
    Sssp(TraverseArgs),
    /// Replay a trace under one or more alignments.
    Raf(RafArgs),
    /// Throughput model: device requirements, throughput and runtime curves.
    Predict(PredictArgs),
    /// Closed-loop simulation over a sweep of added latencies.
    Simulate(SimArgs),
    /// Dependent-read latency measurement.
    Chase(ChaseArgs),
    /// Tables for the read amplification, runtime curve, CXL device and
    /// latency knee studies.
    Report(ReportArgs),
}

#[derive(Args, Debug, Default)]
pub struct GraphArgs {
    /// urand:SCALE:DEGREE, kron:SCALE:EDGE_FACTOR, file:PATH[:undirected] or csr:PATH
    #[arg(long)]
    pub graph: Option<String>,
    /// Memory ceiling for a generated graph, e.g. 4GiB.
    #[arg(long)]
    pub budget: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct GenArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
}

#[derive(Args, Debug, Default)]
pub struct TraverseArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Source vertex, or `random` for a seeded vertex with nonzero degree.
    #[arg(long)]
    pub source: Option<String>,
    /// Seed for SSSP edge weights; 0 gives unit weights.
    #[arg(long)]
    pub weight_seed: Option<String>,
    /// `binary` (TRCE) or `csv`.
    #[arg(long)]
    pub trace_format: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct TraceArgs {
    #[command(flatten)]
    pub traverse: TraverseArgs,
    /// Saved trace (.trce or .csv), instead of `--graph`.
    #[arg(long)]
    pub trace: Option<String>,
    /// `bfs` or `sssp`.
    #[arg(long)]
    pub algorithm: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct RafArgs {
    #[command(flatten)]
    pub input: TraceArgs,
    /// Comma-separated alignment sizes.
    #[arg(long)]
    pub alignments: Option<String>,
    /// Cache capacity: bytes, `unlimited`, or a fraction of the edge list
    /// such as `1/16` or `5%`.
    #[arg(long)]
    pub cache: Option<String>,
    /// `cached` (block alignment), `gpu` (32 B sectors in 128 B lines) or
    /// `variable` (16 B aligned, up to 2 KiB).
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct LinkArgs {
    /// Link preset: gen3 or gen4.
    #[arg(long)]
    pub profile: Option<String>,
    /// Link bandwidth override, e.g. 24000MB/s.
    #[arg(long)]
    pub bandwidth: Option<String>,
    /// Outstanding requests the link admits.
    #[arg(long)]
    pub nmax: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct PredictArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    /// Transfer sizes for the requirement and throughput tables.
    #[arg(long)]
    pub d: Option<String>,
    /// Device preset: host-dram, cxl-dram, bam, example-flash, xlfdd.
    #[arg(long)]
    pub device: Option<String>,
    /// Device IOPS override, e.g. 6MIOPS.
    #[arg(long)]
    pub iops: Option<String>,
    /// Device latency override, e.g. 10us.
    #[arg(long)]
    pub latency: Option<String>,
    /// Transfer sizes for the runtime curve (needs a graph or trace).
    #[arg(long)]
    pub sizes: Option<String>,
    /// Cache capacity for the runtime curve replay.
    #[arg(long)]
    pub cache: Option<String>,
    #[command(flatten)]
    pub input: TraceArgs,
}

#[derive(Args, Debug, Default)]
pub struct SimDeviceArgs {
    /// cxl-gen3 (GPU over Gen 3 to five CXL devices), dram-gen3, or
    /// cxl-micro (one CXL device, no link limit).
    #[arg(long)]
    pub preset: Option<String>,
    /// Added latencies, comma-separated.
    #[arg(long)]
    pub delta: Option<String>,
    /// Outstanding requests the link admits.
    #[arg(long)]
    pub nmax: Option<String>,
    /// Link bandwidth, or `inf`.
    #[arg(long)]
    pub link_bandwidth: Option<String>,
    /// Number of interleaved devices.
    #[arg(long)]
    pub devices: Option<String>,
    /// Per-device outstanding cap.
    #[arg(long)]
    pub cap: Option<String>,
    /// Per-device base latency.
    #[arg(long)]
    pub latency: Option<String>,
    /// Per-device memory channel bandwidth, or `inf`.
    #[arg(long)]
    pub channel_bandwidth: Option<String>,
    /// Split units per second each device can start.
    #[arg(long)]
    pub device_iops: Option<String>,
    /// Request size in bytes, or `emogi` for the 32/64/96/128 B mix.
    #[arg(long)]
    pub size: Option<String>,
    /// Unit size requests are split into at the device.
    #[arg(long)]
    pub split: Option<String>,
    /// Bytes per device before the address interleave moves on.
    #[arg(long)]
    pub interleave: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct SimArgs {
    #[command(flatten)]
    pub device: SimDeviceArgs,
    /// Simulated time per run; stretched to 100x the latency if shorter.
    #[arg(long)]
    pub duration: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct ChaseArgs {
    #[command(flatten)]
    pub device: SimDeviceArgs,
    /// Dependent reads to time.
    #[arg(long)]
    pub hops: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct ReportArgs {
    /// Graph specs for the read amplification table, comma-separated.
    #[arg(long)]
    pub graphs: Option<String>,
    /// Memory ceiling per generated graph.
    #[arg(long)]
    pub budget: Option<String>,
    /// Alignments for the read amplification table.
    #[arg(long)]
    pub alignments: Option<String>,
    /// Cache capacities for the read amplification table.
    #[arg(long)]
    pub cache: Option<String>,
    /// Devices for the runtime curve table.
    #[arg(long)]
    pub devices: Option<String>,
    /// Transfer sizes for the runtime curve table.
    #[arg(long)]
    pub sizes: Option<String>,
    /// Cache capacity for the runtime curve table.
    #[arg(long)]
    pub curve_cache: Option<String>,
    /// Added latencies for the CXL device and latency knee tables.
    #[arg(long)]
    pub delta: Option<String>,
    /// Simulated time per latency point.
    #[arg(long)]
    pub duration: Option<String>,
    /// Dependent reads per chase.
    #[arg(long)]
    pub hops: Option<String>,
}

/// Process exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::Config(_) => EXIT_USAGE,
        Error::Parse { .. }
        | Error::VertexOutOfRange { .. }
        | Error::Format(_)
        | Error::EmptyTrace
        | Error::Io(_) => EXIT_DATA,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Messages go to stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(written) => {
            for p in written {
                println!("wrote {}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command; returns the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let ini = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| with_path(path, e.into()))?;
            Some(
                Ini::load_from_str_noescape(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
            )
        }
        None => None,
    };
    let section = match &cli.command {
        Command::Gen(_) => "gen",
        Command::Bfs(_) => "bfs",
        Command::Sssp(_) => "sssp",
        Command::Raf(_) => "raf",
        Command::Predict(_) => "predict",
        Command::Simulate(_) => "simulate",
        Command::Chase(_) => "chase",
        Command::Report(_) => "report",
    };
    let settings = Settings { ini, section };
    let seed = match cli.seed {
        Some(s) => s,
        None => settings.get("seed", &None, "1", parse_u64)?,
    };
    let jobs = match cli.jobs {
        Some(j) => j,
        None => settings.get("jobs", &None, "0", |s| parse_u64(s).map(|v| v as usize))?,
    };
    let out_dir = match &cli.out {
        Some(p) => p.clone(),
        None => PathBuf::from(settings.raw("out", &None).unwrap_or_else(|| ".".into())),
    };
    let timestamp =
        !cli.no_timestamp && !settings.get("no-timestamp", &None, "false", parse_bool)?;
    let ctx = Ctx {
        settings,
        seed,
        pool: rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
    };
    let mut out = Output {
        dir: out_dir,
        timestamp,
        written: Vec::new(),
    };
    match &cli.command {
        Command::Gen(a) => cmd_gen(&ctx, a, &mut out)?,
        Command::Bfs(a) => cmd_traverse(&ctx, a, Algorithm::Bfs, &mut out)?,
        Command::Sssp(a) => cmd_traverse(&ctx, a, Algorithm::Sssp, &mut out)?,
        Command::Raf(a) => cmd_raf(&ctx, a, &mut out)?,
        Command::Predict(a) => cmd_predict(&ctx, a, &mut out)?,
        Command::Simulate(a) => cmd_simulate(&ctx, a, &mut out)?,
        Command::Chase(a) => cmd_chase(&ctx, a, &mut out)?,
        Command::Report(a) => cmd_report(&ctx, a, &mut out)?,
    }
    Ok(out.written)
}

struct Settings {
    ini: Option<Ini>,
    section: &'static str,
}

impl Settings {
    /// Flag value, else `[command]`, else `[general]` or unsectioned keys.
    /// Keys match with either dashes or underscores.
    fn raw(&self, key: &str, flag: &Option<String>) -> Option<String> {
        if let Some(v) = flag {
            return Some(v.clone());
        }
        let ini = self.ini.as_ref()?;
        let keys = [key.to_string(), key.replace('-', "_")];
        for section in [Some(self.section), Some("general"), None] {
            if let Some(props) = ini.section(section) {
                for k in &keys {
                    if let Some(v) = props.get(k) {
                        return Some(v.trim().to_string());
                    }
                }
            }
        }
        None
    }

    fn opt<T>(
        &self,
        key: &str,
        flag: &Option<String>,
        parse: impl Fn(&str) -> Result<T>,
    ) -> Result<Option<T>> {
        self.raw(key, flag)
            .map(|v| parse(&v).map_err(|e| flag_error(key, e)))
            .transpose()
    }

    fn get<T>(
        &self,
        key: &str,
        flag: &Option<String>,
        default: &str,
        parse: impl Fn(&str) -> Result<T>,
    ) -> Result<T> {
        let v = self.raw(key, flag).unwrap_or_else(|| default.to_string());
        parse(&v).map_err(|e| flag_error(key, e))
    }
}

struct Ctx {
    settings: Settings,
    seed: u64,
    pool: rayon::ThreadPool,
}

struct Output {
    dir: PathBuf,
    timestamp: bool,
    written: Vec<PathBuf>,
}

impl Output {
    /// Writes through a temporary file in the output directory, then renames.
    fn atomic(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut dyn Write) -> Result<()>,
    ) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        {
            let mut w = BufWriter::new(tmp.as_file());
            f(&mut w)?;
            w.flush()?;
        }
        let path = self.dir.join(name);
        tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
        self.written.push(path.clone());
        Ok(path)
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<PathBuf> {
        let stamp = self.timestamp;
        self.atomic(name, |w| {
            if stamp {
                let secs = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                writeln!(
                    w,
                    "# generated by extmem {} at unix time {secs}",
                    env!("CARGO_PKG_VERSION")
                )?;
            }
            f(w)
        })
    }
}

fn flag_error(key: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("--{key}: {m}")),
        e => e,
    }
}

fn parse_u64(s: &str) -> Result<u64> {
    s.trim()
        .replace('_', "")
        .parse()
        .map_err(|_| Error::Config(format!("not an integer: {s:?}")))
}

fn parse_u32(s: &str) -> Result<u32> {
    u32::try_from(parse_u64(s)?)
        .map_err(|_| Error::Config(format!("{s:?} does not fit in 32 bits")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("not a boolean: {s:?}"))),
    }
}

/// Where a graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    Uniform {
        scale: u32,
        degree: f64,
    },
    Kronecker {
        scale: u32,
        edge_factor: f64,
    },
    EdgeList {
        path: PathBuf,
        directedness: Directedness,
    },
    Csr(PathBuf),
}

impl GraphSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad graph spec {spec:?}"));
        let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
        let scale_and = |rest: &str| -> Result<(u32, f64)> {
            let (s, x) = rest.split_once(':').ok_or_else(bad)?;
            let scale: u32 = s.parse().map_err(|_| bad())?;
            let x: f64 = x.parse().map_err(|_| bad())?;
            if scale > 40 {
                return Err(bad());
            }
            Ok((scale, x))
        };
        Ok(match kind {
            "urand" => {
                let (scale, degree) = scale_and(rest)?;
                GraphSpec::Uniform { scale, degree }
            }
            "kron" => {
                let (scale, edge_factor) = scale_and(rest)?;
                GraphSpec::Kronecker { scale, edge_factor }
            }
            "file" => match rest.strip_suffix(":undirected") {
                Some(p) => GraphSpec::EdgeList {
                    path: p.into(),
                    directedness: Directedness::Undirected,
                },
                None => GraphSpec::EdgeList {
                    path: rest.into(),
                    directedness: Directedness::Directed,
                },
            },
            "csr" => GraphSpec::Csr(rest.into()),
            _ => return Err(bad()),
        })
    }

    pub fn load(&self, seed: u64, budget: u64) -> Result<CsrGraph> {
        match self {
            GraphSpec::Uniform { scale, degree } => {
                gen_uniform_random_with_budget(1 << scale, *degree, seed, budget)
            }
            GraphSpec::Kronecker { scale, edge_factor } => {
                gen_kronecker_with_budget(*scale, *edge_factor, seed, budget)
            }
            GraphSpec::EdgeList { path, directedness } => {
                load_edge_list(path, *directedness).map_err(|e| with_path(path, e))
            }
            GraphSpec::Csr(path) => load_csr(path).map_err(|e| with_path(path, e)),
        }
    }
}

/// Names the file in I/O errors, which otherwise only carry the OS message.
fn with_path(path: &Path, err: Error) -> Error {
    match err {
        Error::Io(e) => Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )),
        other => other,
    }
}

/// Cache capacity in bytes or as a share of the edge list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CacheSpec {
    Bytes(u64),
    Fraction(f64),
}

impl CacheSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "none" | "off") {
            return Ok(CacheSpec::Bytes(0));
        }
        if matches!(s, "unlimited" | "inf") {
            return Ok(CacheSpec::Bytes(UNLIMITED_CACHE));
        }
        let frac = if let Some(p) = s.strip_suffix('%') {
            Some(p.trim().parse::<f64>().ok().map(|v| v / 100.0))
        } else if let Some((a, b)) = s.split_once('/') {
            Some(match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
                (Ok(a), Ok(b)) if b > 0.0 => Some(a / b),
                _ => None,
            })
        } else {
            None
        };
        match frac {
            Some(Some(f)) if (0.0..=1.0).contains(&f) => Ok(CacheSpec::Fraction(f)),
            Some(_) => Err(Error::Config(format!("bad cache fraction {s:?}"))),
            None => Ok(CacheSpec::Bytes(parse_bytes(s)?)),
        }
    }

    pub fn resolve(&self, edge_list_bytes: u64) -> u64 {
        match *self {
            CacheSpec::Bytes(b) => b,
            CacheSpec::Fraction(f) => (f * edge_list_bytes as f64).round() as u64,
        }
    }

    fn label(&self) -> String {
        match *self {
            CacheSpec::Bytes(UNLIMITED_CACHE) => "unlimited".into(),
            CacheSpec::Bytes(b) => b.to_string(),
            CacheSpec::Fraction(f) => format!("{f}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Algorithm {
    Bfs,
    Sssp,
}

fn parse_algorithm(s: &str) -> Result<Algorithm> {
    match s {
        "bfs" => Ok(Algorithm::Bfs),
        "sssp" => Ok(Algorithm::Sssp),
        _ => Err(Error::Config(format!(
            "unknown algorithm {s:?} (bfs or sssp)"
        ))),
    }
}

fn load_graph(ctx: &Ctx, a: &GraphArgs) -> Result<CsrGraph> {
    let s = &ctx.settings;
    let spec = s
        .opt("graph", &a.graph, GraphSpec::parse)?
        .ok_or_else(|| Error::config("no graph given: pass --graph"))?;
    let budget = s
        .opt("budget", &a.budget, parse_bytes)?
        .unwrap_or(DEFAULT_EDGE_BUDGET);
    spec.load(ctx.seed, budget)
}

fn resolve_source(ctx: &Ctx, a: &TraverseArgs, g: &CsrGraph) -> Result<VertexId> {
    let src = ctx
        .settings
        .get("source", &a.source, "random", |s| Ok(s.to_string()))?;
    if src == "random" {
        Ok(pick_source(g, ctx.seed).unwrap_or(0))
    } else {
        parse_u64(&src)
    }
}

fn traverse(
    ctx: &Ctx,
    a: &TraverseArgs,
    g: &CsrGraph,
    algo: Algorithm,
) -> Result<(VertexId, AccessTrace, Vec<u64>)> {
    let source = resolve_source(ctx, a, g)?;
    match algo {
        Algorithm::Bfs => {
            let (r, t) = bfs(g, source)?;
            Ok((source, t, r.frontier_sizes))
        }
        Algorithm::Sssp => {
            let ws = ctx
                .settings
                .get("weight-seed", &a.weight_seed, "1", parse_u64)?;
            let (_, t) = sssp(g, source, ws)?;
            let sizes = t.steps().map(|s| s.len() as u64).collect();
            Ok((source, t, sizes))
        }
    }
}

fn read_trace_file(path: &Path) -> Result<AccessTrace> {
    let f = BufReader::new(File::open(path).map_err(|e| with_path(path, e.into()))?);
    if path.extension().is_some_and(|e| e == "csv") {
        AccessTrace::read_csv(f)
    } else {
        AccessTrace::read_binary(&mut { f })
    }
}

/// Trace plus the edge-list size that cache fractions refer to. For a saved
/// trace that is the furthest byte it touches.
fn load_trace(ctx: &Ctx, a: &TraceArgs) -> Result<Option<(AccessTrace, u64)>> {
    let s = &ctx.settings;
    let trace = s.raw("trace", &a.trace);
    let graph = s.raw("graph", &a.traverse.graph.graph);
    match (trace, graph) {
        (Some(_), Some(_)) => Err(Error::config("give either --trace or --graph, not both")),
        (Some(p), None) => {
            let t = read_trace_file(Path::new(&p))?;
            let span = t.reads().iter().map(|r| r.end()).max().unwrap_or(0);
            Ok(Some((t, span)))
        }
        (None, Some(_)) => {
            let g = load_graph(ctx, &a.traverse.graph)?;
            let algo = s.get("algorithm", &a.algorithm, "bfs", parse_algorithm)?;
            let (_, t, _) = traverse(ctx, &a.traverse, &g, algo)?;
            Ok(Some((t, g.edge_list_bytes())))
        }
        (None, None) => Ok(None),
    }
}

fn require_trace(ctx: &Ctx, a: &TraceArgs) -> Result<(AccessTrace, u64)> {
    load_trace(ctx, a)?.ok_or_else(|| Error::config("no input: pass --graph or --trace"))
}

fn cmd_gen(ctx: &Ctx, a: &GenArgs, out: &mut Output) -> Result<()> {
    let g = load_graph(ctx, &a.graph)?;
    out.atomic("graph.csr", |w| write_csr(&g, w))?;
    let st = g.degree_stats();
    out.csv("graph_stats.csv", |w| {
        writeln!(w, "num_vertices,num_edges,distinct_edges,nonzero_vertices,max_degree,avg_degree_nonzero,avg_sublist_bytes,edge_list_bytes")?;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            st.num_vertices,
            st.num_edges,
            st.distinct_edges,
            st.nonzero_vertices,
            st.max_degree,
            st.avg_degree_nonzero,
            st.avg_sublist_bytes,
            g.edge_list_bytes()
        )?;
        Ok(())
    })?;
    println!(
        "{} vertices, {} edges ({} distinct), max degree {}",
        st.num_vertices, st.num_edges, st.distinct_edges, st.max_degree
    );
    Ok(())
}

fn cmd_traverse(ctx: &Ctx, a: &TraverseArgs, algo: Algorithm, out: &mut Output) -> Result<()> {
    let g = load_graph(ctx, &a.graph)?;
    let (source, trace, sizes) = traverse(ctx, a, &g, algo)?;
    let name = match algo {
        Algorithm::Bfs => "bfs",
        Algorithm::Sssp => "sssp",
    };
    let format = ctx
        .settings
        .get("trace-format", &a.trace_format, "binary", |s| {
            Ok(s.to_string())
        })?;
    match format.as_str() {
        "binary" => out.atomic(&format!("{name}_trace.trce"), |w| trace.write_binary(w))?,
        "csv" => out.csv(&format!("{name}_trace.csv"), |w| trace.write_csv(w))?,
        f => return Err(Error::Config(format!("unknown trace format {f:?}"))),
    };
    let (file, col) = match algo {
        Algorithm::Bfs => ("bfs_frontier.csv", "depth,frontier_vertices,useful_bytes"),
        Algorithm::Sssp => ("sssp_rounds.csv", "round,active_vertices,useful_bytes"),
    };
    out.csv(file, |w| {
        writeln!(w, "{col}")?;
        for (i, (n, step)) in sizes.iter().zip(trace.steps()).enumerate() {
            let bytes: u64 = step.iter().map(|r| r.byte_length).sum();
            writeln!(w, "{i},{n},{bytes}")?;
        }
        Ok(())
    })?;
    println!(
        "{name} from {source}: {} steps, {} reads, {} useful bytes",
        trace.num_steps(),
        trace.num_reads(),
        trace.useful_bytes_total()
    );
    Ok(())
}

fn cmd_raf(ctx: &Ctx, a: &RafArgs, out: &mut Output) -> Result<()> {
    let s = &ctx.settings;
    let (trace, edge_bytes) = require_trace(ctx, &a.input)?;
    let cache = s
        .get("cache", &a.cache, "0", CacheSpec::parse)?
        .resolve(edge_bytes);
    let mode = s.get("mode", &a.mode, "cached", |m| Ok(m.to_string()))?;
    let ledgers: Vec<ReadLedger> = match mode.as_str() {
        "cached" => {
            let aligns = s.get("alignments", &a.alignments, DEFAULT_ALIGNMENTS, |v| {
                parse_list(v, parse_bytes)
            })?;
            ctx.pool.install(|| {
                aligns
                    .par_iter()
                    .map(|&al| replay_cached(&trace, &AlignmentConfig::cached_block(al, cache)))
                    .collect::<Result<_>>()
            })?
        }
        "gpu" | "variable" => {
            let mut cfg = if mode == "gpu" {
                AlignmentConfig::gpu_cacheline()
            } else {
                AlignmentConfig::variable_transfer()
            };
            if cfg.mode == TransferMode::GpuCacheline {
                cfg.cache_capacity_bytes = cache;
            }
            vec![replay(&trace, &cfg)?]
        }
        m => return Err(Error::Config(format!("unknown mode {m:?}"))),
    };
    out.csv("raf.csv", |w| write_ledgers_csv(w, &ledgers))?;
    if mode != "cached" {
        out.csv("raf_histogram.csv", |w| {
            writeln!(w, "request_bytes,count")?;
            for (size, n) in &ledgers[0].request_size_histogram {
                writeln!(w, "{size},{n}")?;
            }
            Ok(())
        })?;
    }
    for l in &ledgers {
        println!(
            "a={:>5} B  RAF {:.3}  d {:.1} B",
            l.alignment_bytes, l.raf, l.avg_transfer_bytes
        );
    }
    Ok(())
}

fn resolve_link(ctx: &Ctx, a: &LinkArgs) -> Result<LinkProfile> {
    let s = &ctx.settings;
    let name = s.get("profile", &a.profile, "gen4", |v| Ok(v.to_string()))?;
    let mut link = LinkProfile::preset(&name)
        .ok_or_else(|| Error::Config(format!("unknown link profile {name:?}")))?;
    if let Some(b) = s.opt("bandwidth", &a.bandwidth, parse_bandwidth)? {
        link.bandwidth = b;
    }
    if let Some(n) = s.opt("nmax", &a.nmax, parse_u32)? {
        link.nmax = n;
    }
    link.validate()?;
    Ok(link)
}

fn resolve_device(ctx: &Ctx, a: &PredictArgs) -> Result<Option<DeviceProfile>> {
    let s = &ctx.settings;
    let name = s.raw("device", &a.device);
    let iops = s.opt("iops", &a.iops, parse_iops)?;
    let latency = s.opt("latency", &a.latency, parse_time_ns)?;
    let mut dev = match name {
        Some(n) => DeviceProfile::preset(&n)
            .ok_or_else(|| Error::Config(format!("unknown device {n:?}")))?,
        None if iops.is_some() || latency.is_some() => match (iops, latency) {
            (Some(i), Some(l)) => DeviceProfile::new("custom", i, l)?,
            _ => {
                return Err(Error::config(
                    "a custom device needs both --iops and --latency",
                ))
            }
        },
        None => return Ok(None),
    };
    if let Some(i) = iops {
        dev.iops = i;
    }
    if let Some(l) = latency {
        dev.latency_ns = l;
    }
    dev.validate()?;
    Ok(Some(dev))
}

fn bound_name(dev: &DeviceProfile, link: &LinkProfile, d: f64) -> &'static str {
    let t = throughput(dev, link, d);
    if t == link.bandwidth {
        "bandwidth"
    } else if t == dev.iops * d {
        "iops"
    } else {
        "latency"
    }
}

fn cmd_predict(ctx: &Ctx, a: &PredictArgs, out: &mut Output) -> Result<()> {
    let s = &ctx.settings;
    let link = resolve_link(ctx, &a.link)?;
    let ds = s.get("d", &a.d, "89.6", |v| parse_list(v, parse_bytes_f64))?;
    if ds.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::config("--d: transfer sizes must be positive"));
    }
    out.csv("requirements.csv", |w| {
        writeln!(w, "link,d_bytes,min_iops,max_latency_ns")?;
        for &d in &ds {
            let r = requirements(&link, d);
            writeln!(w, "{},{d},{},{}", link.label, r.min_iops, r.max_latency_ns)?;
        }
        Ok(())
    })?;
    for &d in &ds {
        let r = requirements(&link, d);
        println!(
            "{} d={d} B: S >= {:.2} MIOPS, L <= {:.3} us",
            link.label,
            r.min_iops / 1e6,
            r.max_latency_ns / 1e3
        );
    }
    let Some(dev) = resolve_device(ctx, a)? else {
        return Ok(());
    };
    out.csv("throughput.csv", |w| {
        writeln!(
            w,
            "device,link,d_bytes,throughput_Bps,bound,slope_iops,d_opt_bytes"
        )?;
        for &d in &ds {
            writeln!(
                w,
                "{},{},{d},{},{},{},{}",
                dev.label,
                link.label,
                throughput(&dev, &link, d),
                bound_name(&dev, &link, d),
                slope(&dev, &link),
                optimal_transfer(&dev, &link)
            )?;
        }
        Ok(())
    })?;
    println!(
        "{} on {}: d_opt = {} B, T(d) = {:.1} MB/s at d={}",
        dev.label,
        link.label,
        optimal_transfer(&dev, &link),
        throughput(&dev, &link, ds[0]) / MB_PER_S,
        ds[0]
    );
    if let Some((trace, edge_bytes)) = load_trace(ctx, &a.input)? {
        let sizes = s.get("sizes", &a.sizes, DEFAULT_SIZES, |v| {
            parse_list(v, parse_bytes)
        })?;
        let cache = s
            .get("cache", &a.cache, "0", CacheSpec::parse)?
            .resolve(edge_bytes);
        let curve = predict_runtime_curve(&trace, &sizes, &dev, &link, cache)?;
        out.csv("curve.csv", |w| crate::model::write_curve_csv(w, &curve))?;
        println!("runtime minimum at d = {} B", curve.argmin_d);
    }
    Ok(())
}

fn sim_preset(name: &str) -> Result<SimConfig> {
    Ok(match name {
        "cxl-gen3" => SimConfig::cxl_gpu_gen3(),
        "dram-gen3" => SimConfig::host_dram_gen3(),
        "cxl-micro" => SimConfig::cxl_device_microbench(),
        _ => return Err(Error::Config(format!("unknown simulation preset {name:?}"))),
    })
}

fn parse_request_size(s: &str) -> Result<RequestSize> {
    if s == "emogi" {
        Ok(RequestSize::emogi_mix())
    } else {
        Ok(RequestSize::Fixed(parse_bytes(s)?))
    }
}

fn resolve_sim(
    ctx: &Ctx,
    a: &SimDeviceArgs,
    default_preset: &str,
) -> Result<(SimConfig, Vec<f64>)> {
    let s = &ctx.settings;
    let preset = s.get("preset", &a.preset, default_preset, |v| Ok(v.to_string()))?;
    let mut cfg = sim_preset(&preset)?;
    cfg.seed = ctx.seed;
    if let Some(n) = s.opt("nmax", &a.nmax, parse_u32)? {
        cfg.link_nmax = n;
    }
    if let Some(b) = s.opt("link-bandwidth", &a.link_bandwidth, parse_bandwidth)? {
        cfg.link_bandwidth = b;
    }
    if let Some(n) = s.opt("devices", &a.devices, parse_u64)? {
        let proto = cfg.devices[0].clone();
        cfg.devices = vec![proto; n as usize];
    }
    for d in &mut cfg.devices {
        if let Some(c) = s.opt("cap", &a.cap, parse_u32)? {
            d.outstanding_cap = c;
        }
        if let Some(l) = s.opt("latency", &a.latency, parse_time_ns)? {
            d.base_latency_ns = l;
        }
        if let Some(b) = s.opt("channel-bandwidth", &a.channel_bandwidth, parse_bandwidth)? {
            d.channel_bandwidth = b;
        }
        if let Some(i) = s.opt("device-iops", &a.device_iops, parse_iops)? {
            d.iops = i;
        }
    }
    if let Some(r) = s.opt("size", &a.size, parse_request_size)? {
        cfg.request_size = r;
    }
    if let Some(v) = s.opt("split", &a.split, parse_bytes)? {
        cfg.split_size = v;
    }
    if let Some(v) = s.opt("interleave", &a.interleave, parse_bytes)? {
        cfg.interleave_granularity = v;
    }
    cfg.validate()?;
    let deltas = s.get("delta", &a.delta, "0", |v| parse_list(v, parse_time_ns))?;
    Ok((cfg, deltas))
}

/// Sweep rows in delta order, each run as an independent job.
fn run_sweep(
    ctx: &Ctx,
    cfg: &SimConfig,
    deltas: &[f64],
    duration_ns: f64,
) -> Result<Vec<LatencySweepRow>> {
    ctx.pool.install(|| {
        deltas
            .par_iter()
            .map(|&delta| {
                let need = 100.0 * cfg.with_extra_latency(delta).max_latency_ns();
                sweep_row(cfg, delta, duration_ns.max(need))
            })
            .collect()
    })
}

fn cmd_simulate(ctx: &Ctx, a: &SimArgs, out: &mut Output) -> Result<()> {
    let (cfg, deltas) = resolve_sim(ctx, &a.device, "cxl-gen3")?;
    let duration = ctx
        .settings
        .get("duration", &a.duration, "1ms", parse_time_ns)?;
    let rows = run_sweep(ctx, &cfg, &deltas, duration)?;
    out.csv("sim.csv", |w| write_sweep_csv(w, &rows))?;
    for r in &rows {
        println!(
            "delta {:>7} ns: {:.1} MB/s, {:.1} outstanding, {:.1} ns mean latency",
            r.delta_ns,
            r.stats.measured_throughput / MB_PER_S,
            r.stats.mean_outstanding,
            r.stats.mean_latency_ns
        );
    }
    Ok(())
}

fn cmd_chase(ctx: &Ctx, a: &ChaseArgs, out: &mut Output) -> Result<()> {
    let s = &ctx.settings;
    let (cfg, deltas) = resolve_sim(ctx, &a.device, "cxl-micro")?;
    let deltas = if s.raw("delta", &a.device.delta).is_some() {
        deltas
    } else {
        parse_list("0,1us,2us,3us", parse_time_ns)?
    };
    let hops = s.get("hops", &a.hops, "10000", parse_u64)?;
    let rows = ctx.pool.install(|| {
        deltas
            .par_iter()
            .map(|&delta| {
                let c = cfg.with_extra_latency(delta);
                pointer_chase(&c, hops).map(|st| (delta, c.mean_latency_ns(), st.per_hop_ns))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    out.csv("chase.csv", |w| {
        writeln!(w, "delta_latency_ns,configured_latency_ns,per_hop_ns")?;
        for (d, l, h) in &rows {
            writeln!(w, "{d},{l},{h}")?;
        }
        Ok(())
    })?;
    for (d, l, h) in &rows {
        println!("delta {d} ns: {h:.1} ns per hop (configured {l} ns)");
    }
    Ok(())
}

fn cmd_report(ctx: &Ctx, a: &ReportArgs, out: &mut Output) -> Result<()> {
    let s = &ctx.settings;
    let specs: Vec<String> = s.get("graphs", &a.graphs, "urand:16:32,kron:16:16", |v| {
        parse_list(v, |x| GraphSpec::parse(x).map(|_| x.to_string()))
    })?;
    let budget = s
        .opt("budget", &a.budget, parse_bytes)?
        .unwrap_or(DEFAULT_EDGE_BUDGET);
    let aligns = s.get("alignments", &a.alignments, DEFAULT_ALIGNMENTS, |v| {
        parse_list(v, parse_bytes)
    })?;
    let caches = s.get("cache", &a.cache, "0,1/16", |v| {
        parse_list(v, CacheSpec::parse)
    })?;
    let devices = s.get("devices", &a.devices, "bam,example-flash,xlfdd", |v| {
        parse_list(v, |x| {
            DeviceProfile::preset(x).ok_or_else(|| Error::Config(format!("unknown device {x:?}")))
        })
    })?;
    let sizes = s.get("sizes", &a.sizes, DEFAULT_SIZES, |v| {
        parse_list(v, parse_bytes)
    })?;
    let curve_cache = s.get("curve-cache", &a.curve_cache, "1/16", CacheSpec::parse)?;
    let deltas = s.get("delta", &a.delta, DEFAULT_DELTAS, |v| {
        parse_list(v, parse_time_ns)
    })?;
    let duration = s.get("duration", &a.duration, "1ms", parse_time_ns)?;
    let hops = s.get("hops", &a.hops, "2000", parse_u64)?;

    // read amplification and runtime curves share the BFS traces
    let mut traces = Vec::new();
    for spec in &specs {
        let g = GraphSpec::parse(spec)?.load(ctx.seed, budget)?;
        let source = pick_source(&g, ctx.seed).unwrap_or(0);
        let (_, t) = bfs(&g, source)?;
        traces.push((spec.clone(), t, g.edge_list_bytes()));
    }
    let mut jobs: Vec<(usize, CacheSpec, u64)> = Vec::new();
    for i in 0..traces.len() {
        for &c in &caches {
            for &al in &aligns {
                jobs.push((i, c, al));
            }
        }
    }
    let ledgers = ctx.pool.install(|| {
        jobs.par_iter()
            .map(|&(i, c, al)| {
                let (_, t, bytes) = &traces[i];
                replay_cached(t, &AlignmentConfig::cached_block(al, c.resolve(*bytes)))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    out.csv("fig3_raf.csv", |w| {
        writeln!(w, "graph,cache,cache_bytes,alignment_bytes,useful_bytes,fetched_bytes,raf,avg_transfer_bytes")?;
        for (&(i, c, _), l) in jobs.iter().zip(&ledgers) {
            let (spec, _, bytes) = &traces[i];
            writeln!(
                w,
                "{spec},{},{},{},{},{},{},{}",
                c.label(),
                c.resolve(*bytes),
                l.alignment_bytes,
                l.useful_bytes,
                l.fetched_bytes,
                l.raf,
                l.avg_transfer_bytes
            )?;
        }
        Ok(())
    })?;

    let gen4 = LinkProfile::pcie_gen4();
    let curves = ctx.pool.install(|| {
        devices
            .par_iter()
            .map(|dev| {
                let (_, t, bytes) = &traces[0];
                predict_runtime_curve(t, &sizes, dev, &gen4, curve_cache.resolve(*bytes))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    out.csv("fig4_runtime.csv", |w| {
        writeln!(w, "graph,device,{CURVE_CSV_HEADER},is_min")?;
        for (dev, curve) in devices.iter().zip(&curves) {
            for p in &curve.points {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    traces[0].0,
                    dev.label,
                    p.d_bytes,
                    p.total_bytes,
                    p.throughput,
                    p.runtime_s,
                    p.d_bytes == curve.argmin_d
                )?;
            }
        }
        Ok(())
    })?;

    let mut micro = SimConfig::cxl_device_microbench();
    micro.seed = ctx.seed;
    let micro_rows = run_sweep(ctx, &micro, &deltas, duration)?;
    let chases = ctx.pool.install(|| {
        deltas
            .par_iter()
            .map(|&d| pointer_chase(&micro.with_extra_latency(d), hops).map(|c| c.per_hop_ns))
            .collect::<Result<Vec<_>>>()
    })?;
    out.csv("fig7_cxl_device.csv", |w| {
        writeln!(w, "delta_latency_ns,throughput_Bps,mean_outstanding,computed_outstanding,mean_latency_ns,chase_per_hop_ns")?;
        for (r, h) in micro_rows.iter().zip(&chases) {
            writeln!(
                w,
                "{},{},{},{},{},{h}",
                r.delta_ns,
                r.stats.measured_throughput,
                r.stats.mean_outstanding,
                r.computed_outstanding,
                r.stats.mean_latency_ns
            )?;
        }
        Ok(())
    })?;

    let mut cxl = SimConfig::cxl_gpu_gen3();
    cxl.seed = ctx.seed;
    let mut host = SimConfig::host_dram_gen3();
    host.seed = ctx.seed;
    let d = cxl.request_size.mean_bytes();
    let gen3 = LinkProfile::pcie_gen3();
    let host_dev = DeviceProfile::host_dram();
    let host_pred = throughput(&host_dev, &gen3, d);
    let host_sim = run_sweep(ctx, &host, &[0.0], duration)?[0]
        .stats
        .measured_throughput;
    let cxl_rows = run_sweep(ctx, &cxl, &deltas, duration)?;
    out.csv("fig8_latency_knee.csv", |w| {
        writeln!(w, "delta_latency_ns,gpu_latency_ns,predicted_norm_runtime,simulated_norm_runtime,simulated_throughput_Bps")?;
        for r in &cxl_rows {
            let dev = DeviceProfile {
                latency_ns: r.latency_ns,
                ..DeviceProfile::cxl_dram()
            };
            writeln!(
                w,
                "{},{},{},{},{}",
                r.delta_ns,
                r.latency_ns,
                host_pred / throughput(&dev, &gen3, d),
                host_sim / r.stats.measured_throughput,
                r.stats.measured_throughput
            )?;
        }
        Ok(())
    })?;
    println!(
        "report: {} graphs, {} devices, {} latency points",
        specs.len(),
        devices.len(),
        deltas.len()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_specs() {
        assert_eq!(
            GraphSpec::parse("urand:20:32").unwrap(),
            GraphSpec::Uniform {
                scale: 20,
                degree: 32.0
            }
        );
        assert_eq!(
            GraphSpec::parse("kron:16:16").unwrap(),
            GraphSpec::Kronecker {
                scale: 16,
                edge_factor: 16.0
            }
        );
        assert_eq!(
            GraphSpec::parse("file:a/b.txt:undirected").unwrap(),
            GraphSpec::EdgeList {
                path: "a/b.txt".into(),
                directedness: Directedness::Undirected
            }
        );
        assert!(GraphSpec::parse("urand:20").is_err());
        assert!(GraphSpec::parse("grid:3:3").is_err());
    }

    #[test]
    fn cache_specs() {
        assert_eq!(CacheSpec::parse("1/16").unwrap().resolve(1600), 100);
        assert_eq!(CacheSpec::parse("50%").unwrap().resolve(1600), 800);
        assert_eq!(CacheSpec::parse("1MiB").unwrap().resolve(0), 1 << 20);
        assert_eq!(
            CacheSpec::parse("unlimited").unwrap().resolve(0),
            UNLIMITED_CACHE
        );
        assert!(CacheSpec::parse("3/2").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            exit_code(&Error::Capacity {
                requested: 1,
                budget: 0
            }),
            EXIT_CAPACITY
        );
        assert_eq!(exit_code(&Error::config("x")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::EmptyTrace), EXIT_DATA);
    }
}
