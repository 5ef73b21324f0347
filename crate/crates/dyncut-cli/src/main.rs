use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dyncut::families::{random_stream, Family};
use dyncut::io::{parse_graph, parse_stream, write_graph, write_stream, StreamItem};
use dyncut::{oracle, DynamicGraph, MasterState, Params};

#[derive(Parser)]
#[command(name = "dyncut", version, about = "Dynamic approximate global minimum cut")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay an update stream and answer every "?" line.
    Run(RunArgs),
    /// Random family graphs and streams, one CSV row per query.
    Bench(BenchArgs),
    /// Write a family graph and a random stream to files.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    Desk,
}

#[derive(Args, Clone)]
struct AlgoArgs {
    #[arg(long, value_enum, default_value = "desk")]
    mode: ModeArg,
    /// Falls back to DYNCUT_SEED, then 0.
    #[arg(long, env = "DYNCUT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    restart_factor: Option<f64>,
    /// Compute the exact min cut at each query (n must stay within the
    /// oracle's exhaustive limit).
    #[arg(long)]
    oracle: bool,
    /// Drive ladder instances from a thread pool.
    #[arg(long)]
    parallel_instances: bool,
}

impl AlgoArgs {
    fn params(&self, n: usize) -> Result<Params> {
        let mut p = match self.mode {
            ModeArg::Desk => Params::desk(),
            ModeArg::Paper => Params::paper(n),
        };
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.eps, self.eps);
        set(&mut p.phi, self.phi);
        set(&mut p.alpha, self.alpha);
        set(&mut p.rho, self.rho);
        set(&mut p.lambda_min, self.lambda_min);
        set(&mut p.lambda_max, self.lambda_max);
        set(&mut p.restart_factor, self.restart_factor);
        p.validate()?;
        Ok(p)
    }

    fn master(&self, g: &DynamicGraph, seed: u64) -> Result<MasterState> {
        if self.oracle && g.n() > oracle::OracleLimits::default().max_subset_vertices {
            bail!(
                "--oracle supports at most {} vertices, graph has {}",
                oracle::OracleLimits::default().max_subset_vertices,
                g.n()
            );
        }
        let mut m = MasterState::new(g, &self.params(g.n())?, seed)?;
        m.set_parallel(self.parallel_instances);
        Ok(m)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    stream: PathBuf,
    #[command(flatten)]
    algo: AlgoArgs,
    /// Also print the cut side of every answered query.
    #[arg(long)]
    emit_cut: bool,
    /// Write levels.csv and clusters.csv here, one snapshot per query.
    #[arg(long)]
    diag_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "gnp")]
    family: Family,
    #[arg(long, default_value_t = 14)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    m_max: u64,
    #[arg(long, default_value_t = 100)]
    ops: usize,
    #[arg(long, default_value_t = 5)]
    query_every: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[command(flatten)]
    algo: AlgoArgs,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "gnp")]
    family: Family,
    #[arg(long, default_value_t = 14)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    m_max: u64,
    #[arg(long, default_value_t = 100)]
    ops: usize,
    #[arg(long, default_value_t = 5)]
    query_every: usize,
    #[arg(long, env = "DYNCUT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    graph_out: PathBuf,
    #[arg(long)]
    stream_out: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn exact(g: &DynamicGraph) -> Result<u64> {
    Ok(oracle::exact_min_cut(g)?.boundary)
}

struct Diagnostics {
    levels: csv::Writer<fs::File>,
    clusters: csv::Writer<fs::File>,
}

impl Diagnostics {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut levels = csv::Writer::from_path(dir.join("levels.csv"))?;
        levels.write_record([
            "step",
            "instance",
            "depth",
            "kind",
            "nodes",
            "edges",
            "clusters",
            "frozen",
            "intercluster",
            "forwarded",
        ])?;
        let mut clusters = csv::Writer::from_path(dir.join("clusters.csv"))?;
        clusters.write_record([
            "step",
            "instance",
            "depth",
            "cluster",
            "size",
            "boundary_size",
            "frozen",
            "unchecked",
            "potential",
        ])?;
        Ok(Self { levels, clusters })
    }

    fn snapshot(&mut self, step: usize, m: &MasterState) -> Result<()> {
        for inst in m.instances() {
            for r in inst.hierarchy.level_rows() {
                self.levels.write_record([
                    step.to_string(),
                    inst.index.to_string(),
                    r.depth.to_string(),
                    format!("{:?}", r.kind).to_lowercase(),
                    r.nodes.to_string(),
                    r.edges.to_string(),
                    r.clusters.to_string(),
                    r.frozen.to_string(),
                    r.intercluster.to_string(),
                    r.forwarded.to_string(),
                ])?;
            }
            for (depth, r) in inst.hierarchy.cluster_rows() {
                self.clusters.write_record([
                    step.to_string(),
                    inst.index.to_string(),
                    depth.to_string(),
                    r.id.to_string(),
                    r.size.to_string(),
                    r.boundary_size.to_string(),
                    r.frozen.to_string(),
                    r.unchecked.to_string(),
                    format!("{:.4}", r.potential),
                ])?;
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.levels.flush()?;
        self.clusters.flush()?;
        Ok(())
    }
}

fn run(args: &RunArgs) -> Result<()> {
    let g = parse_graph(&read(&args.graph)?).with_context(|| format!("parsing {}", args.graph.display()))?;
    let stream = parse_stream(&read(&args.stream)?).with_context(|| format!("parsing {}", args.stream.display()))?;
    let mut m = args.algo.master(&g, args.algo.seed)?;
    let mut diag = args.diag_dir.as_deref().map(Diagnostics::create).transpose()?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut step = 0;
    for item in stream {
        match item {
            StreamItem::Update(op) => {
                step += 1;
                m.apply_update(op).with_context(|| format!("update {step} ({op:?})"))?;
            }
            StreamItem::Query => {
                let mut line = match m.query() {
                    Some(q) => {
                        let (side, boundary) = m.extract_cut(&q)?;
                        let mut s = format!("value={} instance={} exact_boundary={}", q.value, q.instance, boundary);
                        if args.emit_cut {
                            let ids: Vec<String> = side.iter().map(|v| v.to_string()).collect();
                            s.push_str(&format!(" cut={}", ids.join(" ")));
                        }
                        s
                    }
                    None => "value=none".to_string(),
                };
                if args.algo.oracle {
                    line.push_str(&format!(" exact_min_cut={}", exact(m.source())?));
                }
                writeln!(out, "{line}")?;
                if let Some(d) = diag.as_mut() {
                    d.snapshot(step, &m)?;
                }
            }
        }
    }
    if let Some(d) = diag {
        d.finish()?;
    }
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    if args.n < 2 {
        bail!("--n must be at least 2");
    }
    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["step", "query_value", "instance", "exact_boundary"];
    if args.algo.oracle {
        header.extend(["exact_min_cut", "ratio"]);
    }
    w.write_record(&header)?;
    for trial in 0..args.trials {
        let seed = dyncut::rng::derive(args.algo.seed, trial as u64);
        let g = args.family.generate(args.n, args.m_max, seed);
        let stream = random_stream(&g, args.ops, args.query_every, dyncut::rng::derive(seed, 1));
        let mut m = args.algo.master(&g, dyncut::rng::derive(seed, 2))?;
        let mut step = trial * args.ops;
        for item in stream {
            match item {
                StreamItem::Update(op) => {
                    step += 1;
                    m.apply_update(op)?;
                }
                StreamItem::Query => {
                    let q = m.query();
                    let mut rec = match &q {
                        Some(q) => {
                            let (_, boundary) = m.extract_cut(q)?;
                            vec![step.to_string(), q.value.to_string(), q.instance.to_string(), boundary.to_string()]
                        }
                        None => vec![step.to_string(), String::new(), String::new(), String::new()],
                    };
                    if args.algo.oracle {
                        let lam = exact(m.source())?;
                        rec.push(lam.to_string());
                        rec.push(match &q {
                            Some(q) if lam > 0 => format!("{:.6}", q.value / lam as f64),
                            _ => String::new(),
                        });
                    }
                    w.write_record(&rec)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn gen(args: &GenArgs) -> Result<()> {
    let g = args.family.generate(args.n, args.m_max, args.seed);
    let s = random_stream(&g, args.ops, args.query_every, dyncut::rng::derive(args.seed, 1));
    fs::write(&args.graph_out, write_graph(&g)).with_context(|| format!("writing {}", args.graph_out.display()))?;
    fs::write(&args.stream_out, write_stream(&s)).with_context(|| format!("writing {}", args.stream_out.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run(a) => run(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
