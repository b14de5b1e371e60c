//! `prdo`: generate graphs, build structures, answer and verify queries,
//! benchmark and report sizes. Exits 0 iff every check passes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use prdo::gen::GraphSpec;
use prdo::graph::{dijkstra_sssp, load_graph, save_graph, Format, VertexId, WeightedGraph};
use prdo::harness::{
    all_pairs_list, bench, build, default_queries, random_pairs, stats, verify, workers_from_env, BuildSpec,
    Construction, OracleFile,
};
use prdo::partial_tz::PartialAnswer;

#[derive(Parser)]
#[command(name = "prdo", version, about = "Path-reporting distance oracles and their building blocks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated graph.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value = "edge-list")]
        format: Format,
        /// Output file; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a structure and store it with its graph.
    Build(BuildArgs),
    /// Answer queries as TSV: u, v, d_exact, d_reported, stretch, path_len.
    Query {
        #[arg(long)]
        oracle: PathBuf,
        #[command(flatten)]
        queries: QueryArgs,
    },
    /// Check answers against exact distances and re-check invariants.
    Verify {
        #[arg(long)]
        oracle: PathBuf,
        #[command(flatten)]
        queries: QueryArgs,
        #[arg(long, value_enum, default_value_t = Output::Tsv)]
        output: Output,
    },
    /// Count per-query work and time repeated passes.
    Bench {
        #[arg(long)]
        oracle: PathBuf,
        #[command(flatten)]
        queries: QueryArgs,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, value_enum, default_value_t = Output::Tsv)]
        output: Output,
    },
    /// Size in words per component and counting passes.
    Stats {
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, value_enum, default_value_t = Output::Tsv)]
        output: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Tsv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    ErdosRenyi,
    Grid,
    Path,
    RandomGeometric,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value_t = Generator::ErdosRenyi)]
    generator: Generator,
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Edge probability of the random graph.
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    /// Largest integer weight; weights are uniform in 1..=max_w.
    #[arg(long, default_value_t = 100)]
    max_w: u32,
    /// Allow disconnected random graphs.
    #[arg(long)]
    allow_disconnected: bool,
    #[arg(long, default_value_t = 10)]
    rows: usize,
    #[arg(long, default_value_t = 10)]
    cols: usize,
    #[arg(long, default_value_t = 0.15)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
}

impl GenArgs {
    fn generate(&self) -> WeightedGraph {
        let spec = match self.generator {
            Generator::ErdosRenyi => {
                GraphSpec::ErdosRenyi { n: self.n, p: self.p, max_w: self.max_w, connected: !self.allow_disconnected }
            }
            Generator::Grid => GraphSpec::Grid { rows: self.rows, cols: self.cols, max_w: self.max_w },
            Generator::Path => GraphSpec::Path { n: self.n },
            Generator::RandomGeometric => GraphSpec::RandomGeometric { n: self.n, radius: self.radius },
        };
        spec.generate(self.graph_seed)
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Graph file; a generated graph is used if absent.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Graph file format; guessed from the extension if absent.
    #[arg(long)]
    graph_format: Option<Format>,
    #[command(flatten)]
    gen: GenArgs,
    /// Structure to build, such as v1, hopset, mn-emulator or mn-3eps.
    #[arg(long)]
    construction: Construction,
    #[arg(long, default_value_t = 4)]
    k: u32,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Depth of the partial oracle (default 2); for composed presets an
    /// explicit depth replacing the selected one.
    #[arg(long)]
    h: Option<usize>,
    /// Hierarchy level of the pivot map.
    #[arg(long, default_value_t = 1)]
    level: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Demand pairs file with one `u v` per line.
    #[arg(long)]
    demand: Option<PathBuf>,
    /// Number of random demand pairs when no file is given.
    #[arg(long, default_value_t = 200)]
    demand_random: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Output::Tsv)]
    output: Output,
}

#[derive(Args)]
struct QueryArgs {
    /// Pairs file with one `u v` per line.
    #[arg(long, conflicts_with_all = ["all", "random"])]
    pairs: Option<PathBuf>,
    /// Every ordered pair.
    #[arg(long)]
    all: bool,
    /// Random distinct pairs.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    query_seed: u64,
}

impl QueryArgs {
    /// The chosen set, or the structure's natural one.
    fn resolve(&self, f: &OracleFile) -> Result<Vec<(VertexId, VertexId)>> {
        Ok(if let Some(p) = &self.pairs {
            read_pairs(p)?
        } else if self.all {
            all_pairs_list(f.graph.n())
        } else if let Some(r) = self.random {
            random_pairs(f.graph.n(), r, self.query_seed)
        } else {
            default_queries(f)
        })
    }
}

fn read_pairs(path: &Path) -> Result<Vec<(VertexId, VertexId)>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut it = t.split_whitespace().map(str::parse::<VertexId>);
        match (it.next(), it.next()) {
            (Some(Ok(u)), Some(Ok(v))) => out.push((u, v)),
            _ => bail!("{}:{}: expected `u v`", path.display(), i + 1),
        }
    }
    Ok(out)
}

fn read_graph(path: &Path, format: Option<Format>) -> Result<WeightedGraph> {
    let format = format.unwrap_or(if path.extension().is_some_and(|e| e == "gr") {
        Format::DimacsGr
    } else {
        Format::EdgeList
    });
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    load_graph(file, format).with_context(|| format!("reading {}", path.display()))
}

fn read_oracle(path: &Path) -> Result<OracleFile> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    OracleFile::from_bytes(&bytes).with_context(|| format!("loading {}", path.display()))
}

fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn print_map<'a>(entries: impl Iterator<Item = (&'a String, &'a f64)>, output: Output) -> Result<()> {
    let map: std::collections::BTreeMap<&String, &f64> = entries.collect();
    match output {
        Output::Json => emit(&format!("{}\n", serde_json::to_string_pretty(&map)?)),
        Output::Tsv => emit(&map.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect::<String>()),
    }
}

fn cmd_build(a: &BuildArgs) -> Result<bool> {
    let g = match &a.graph {
        Some(p) => read_graph(p, a.graph_format)?,
        None => a.gen.generate(),
    };
    let mut spec = BuildSpec::new(a.construction, a.k, a.eps, a.seed);
    spec.h = a.h;
    spec.level = a.level;
    if a.construction.needs_demand() {
        spec.demand = match &a.demand {
            Some(p) => read_pairs(p)?,
            None => random_pairs(g.n(), a.demand_random, a.seed),
        };
    }
    let f = build(&g, &spec).with_context(|| format!("building {}", a.construction))?;
    std::fs::write(&a.out, f.to_bytes()).with_context(|| format!("writing {}", a.out.display()))?;
    let mut info: Vec<(String, f64)> = vec![("n".into(), g.n() as f64), ("m".into(), g.m() as f64)];
    info.extend(f.info.iter().cloned());
    print_map(info.iter().map(|(k, v)| (k, v)), a.output)?;
    Ok(true)
}

fn cmd_query(oracle: &Path, q: &QueryArgs) -> Result<bool> {
    let f = read_oracle(oracle)?;
    let g = &f.graph;
    let pairs = q.resolve(&f)?;
    let out = std::io::stdout();
    let mut w = BufWriter::new(out.lock());
    writeln!(w, "u\tv\td_exact\td_reported\tstretch\tpath_len")?;
    let mut ok = true;
    let mut tree = None;
    for (u, v) in pairs {
        if (u as usize) >= g.n() || (v as usize) >= g.n() {
            bail!("pair ({u},{v}) outside 0..{}", g.n());
        }
        if tree.as_ref().map_or(true, |t: &prdo::graph::ShortestPathTree| t.source != u) {
            tree = Some(dijkstra_sssp(g, u));
        }
        let d = tree.as_ref().unwrap().dist[v as usize];
        let reported = if let Some(o) = f.structure.oracle() {
            o.query(g, u, v).map(|p| (p.weight, p.hops())).map_err(|e| e.to_string())
        } else if let Some(e) = f.structure.emulator() {
            e.query(u, v).map(|p| (p.weight, p.hops())).map_err(|e| e.to_string())
        } else if let prdo::harness::Structure::PartialTz(o) = &f.structure {
            match o.partial_query(g, u, v) {
                PartialAnswer::Direct(p) => Ok((p.weight, p.hops())),
                PartialAnswer::Escape { .. } => Err("escape".to_string()),
            }
        } else {
            bail!("{} answers no queries; use verify", f.spec.construction);
        };
        match reported {
            Ok((w_rep, len)) => {
                let s = if d > 0.0 { w_rep / d } else { 1.0 };
                writeln!(w, "{u}\t{v}\t{d}\t{w_rep}\t{s}\t{len}")?;
            }
            Err(e) => {
                ok &= e == "escape";
                writeln!(w, "{u}\t{v}\t{d}\t{e}\t\t")?;
            }
        }
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Gen { gen, format, out } => {
            let g = gen.generate();
            match out {
                Some(p) => save_graph(&g, BufWriter::new(File::create(&p)?), format)?,
                None => save_graph(&g, BufWriter::new(std::io::stdout().lock()), format)?,
            }
            Ok(true)
        }
        Cmd::Build(a) => cmd_build(&a),
        Cmd::Query { oracle, queries } => cmd_query(&oracle, &queries),
        Cmd::Verify { oracle, queries, output } => {
            let f = read_oracle(&oracle)?;
            let r = verify(&f, &queries.resolve(&f)?, workers_from_env());
            match output {
                Output::Json => emit(&format!("{}\n", r.to_json()))?,
                Output::Tsv => emit(&r.to_tsv())?,
            }
            Ok(r.passed())
        }
        Cmd::Bench { oracle, queries, reps, output } => {
            let f = read_oracle(&oracle)?;
            let b = bench(&f, &queries.resolve(&f)?, reps);
            match output {
                Output::Json => emit(&format!("{}\n", serde_json::to_string_pretty(&b)?))?,
                Output::Tsv => {
                    let value = serde_json::to_value(&b)?;
                    let mut text = String::new();
                    for (k, v) in value.as_object().expect("report is an object") {
                        match v.as_object() {
                            Some(inner) => inner.iter().for_each(|(ik, iv)| text.push_str(&format!("{k}.{ik}\t{iv}\n"))),
                            None => text.push_str(&format!("{k}\t{v}\n")),
                        }
                    }
                    emit(&text)?;
                }
            }
            Ok(b.failed_queries == 0)
        }
        Cmd::Stats { oracle, output } => {
            let f = read_oracle(&oracle)?;
            print_map(stats(&f).iter(), output)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        // A closed downstream pipe is not a failure of the run.
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
