use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use heapbench::adversary::{
    build_capped_instance, build_varianta_perfect, build_varianta_skeleton, control_rp1,
    run_insert_deletemin_attack, run_varianta_cycle,
};
use heapbench::analysis::Scheme;
use heapbench::dot::{export_dot, DotView};
use heapbench::oracle::{differential_run, Executor};
use heapbench::runner::{run_trace, write_csv, CheckMode, RunOptions};
use heapbench::trace::Trace;
use heapbench::workload::{dijkstra, gen_random, gen_sort, prim, Graph, OpMix};
use heapbench::{MatchPolicy, StructureKind};

/// Meldable-heap workload harness: generate traces, replay them with
/// invariant checks and cost metrics, benchmark implementations, export
/// structure drawings, and run the scripted adversaries.
#[derive(Parser)]
#[command(name = "heapbench", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a workload trace.
    Gen(GenArgs),
    /// Replay a trace against an implementation.
    Run(RunArgs),
    /// Compare implementations on standard workloads.
    Bench(BenchArgs),
    /// Export a heap drawing in graph-description format.
    Dot(DotArgs),
    /// Build adversarial instances and measure the damage.
    Adversary(AdversaryArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Workload: sort, random, dijkstra, prim.
    workload: String,
    /// Item / op count (sort, random).
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Structure-kind hint recorded in the trace header; also the heap
    /// driving dijkstra/prim trace generation.
    #[arg(long = "impl", default_value = "rp2")]
    kind: StructureKind,
    /// Graph edge-list file (`u v w` per line) for dijkstra/prim.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Source vertex for dijkstra.
    #[arg(long, default_value_t = 0)]
    source: u32,
    /// Output path; `-` for stdout.
    #[arg(long, default_value = "-")]
    trace: String,
}

#[derive(Args)]
struct RunArgs {
    /// Trace file; `-` for stdin.
    #[arg(long)]
    trace: String,
    #[arg(long = "impl")]
    kind: StructureKind,
    /// Match policy override (unrestricted, red-first, disassembly-first).
    #[arg(long)]
    policy: Option<MatchPolicy>,
    #[arg(long = "check-invariants", default_value = "off")]
    check: CheckMode,
    /// Potential-function scheme for the phi CSV columns; `auto` picks
    /// the natural scheme for the implementation.
    #[arg(long)]
    analysis: Option<String>,
    /// Metrics CSV path; `-` for stdout, omit for no metrics.
    #[arg(long)]
    metrics: Option<String>,
    /// Shadow every op against the reference oracle.
    #[arg(long, default_value_t = false)]
    oracle: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite: sort, random, dijkstra, or `none` for an empty report.
    #[arg(long, default_value = "sort")]
    suite: String,
    /// Comma-separated implementations.
    #[arg(long, default_value = "rp1,rp2,bq-onepass,bq-eager,tournament,pairing")]
    impls: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV; `-` for stdout.
    #[arg(long, default_value = "-")]
    metrics: String,
}

#[derive(Args)]
struct DotArgs {
    /// Trace file to build the heap; `-` for stdin.
    #[arg(long)]
    trace: String,
    #[arg(long = "impl")]
    kind: StructureKind,
    #[arg(long)]
    policy: Option<MatchPolicy>,
    /// View: half-ordered, heap-ordered, full, half-empty.
    #[arg(long, default_value = "half-ordered")]
    view: DotView,
    /// Heap name from the trace (defaults to the only surviving heap).
    #[arg(long)]
    heap: Option<String>,
    /// Output path; `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct AdversaryArgs {
    /// Attack: varianta (bounded rank difference) or capped (bounded
    /// cascade steps).
    attack: String,
    #[arg(long, default_value_t = 1)]
    b: u32,
    #[arg(long, default_value_t = 15)]
    k: u32,
    #[arg(long, default_value_t = 0)]
    d: u32,
    #[arg(long, default_value_t = 50)]
    cycles: usize,
    /// Build sparse skeleton instances instead of honest perfect builds
    /// (varianta only; required for large k).
    #[arg(long, default_value_t = false)]
    skeleton: bool,
    /// Write the build trace here for replay against any implementation.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn seed_override(seed: u64) -> u64 {
    match std::env::var("HEAPBENCH_SEED") {
        Ok(s) => s.parse().unwrap_or(seed),
        Err(_) => seed,
    }
}

fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| format!("stdin: {e}"))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
    }
}

fn write_output(path: &str, text: &str) -> Result<(), String> {
    if path == "-" {
        print!("{text}");
        Ok(())
    } else {
        fs::write(path, text).map_err(|e| format!("{path}: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Dot(a) => cmd_dot(a),
        Cmd::Adversary(a) => cmd_adversary(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("heapbench: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn load_graph(path: &Option<PathBuf>) -> Result<Graph, String> {
    let path = path.as_ref().ok_or("--graph is required for this workload")?;
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Graph::parse(&text).map_err(|e| e.to_string())
}

fn cmd_gen(a: GenArgs) -> Result<(), String> {
    let seed = seed_override(a.seed);
    let trace = match a.workload.as_str() {
        "sort" => gen_sort(a.n, seed),
        "random" => gen_random(a.n, OpMix::STANDARD.for_kind(a.kind), seed),
        "dijkstra" => {
            let graph = load_graph(&a.graph)?;
            dijkstra(&graph, a.source, a.kind, a.kind.default_policy())
                .map_err(|e| e.to_string())?
                .trace
        }
        "prim" => {
            let graph = load_graph(&a.graph)?;
            prim(&graph, a.kind, a.kind.default_policy()).map_err(|e| e.to_string())?.trace
        }
        w => return Err(format!("unknown workload `{w}` (sort, random, dijkstra, prim)")),
    };
    write_output(&a.trace, &trace.to_string())
}

fn cmd_run(a: RunArgs) -> Result<(), String> {
    let text = read_input(&a.trace)?;
    let trace = Trace::parse(&text).map_err(|e| e.to_string())?;
    let mut opts = RunOptions::new(a.kind);
    if let Some(p) = a.policy {
        opts.policy = p;
    }
    opts.check = a.check;
    opts.scheme = match a.analysis.as_deref() {
        None => None,
        Some("auto") => Scheme::default_for(a.kind),
        Some(s) => Some(s.parse::<Scheme>().map_err(|e| e.to_string())?),
    };
    if a.oracle {
        if let Err(m) = differential_run(&trace, a.kind, opts.policy) {
            return Err(format!(
                "oracle mismatch at op {}: expected {:?}, got {:?} (shrunk to {} ops)",
                m.op_index,
                m.expected,
                m.got,
                m.shrunk.ops.len()
            ));
        }
    }
    let with_phi = opts.scheme.is_some();
    let report = run_trace(&trace, opts).map_err(|e| e.to_string())?;
    if let Some(path) = a.metrics {
        let mut buf = Vec::new();
        write_csv(&report.rows, with_phi, &mut buf).map_err(|e| e.to_string())?;
        write_output(&path, &String::from_utf8(buf).expect("csv is utf-8"))?;
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), String> {
    let seed = seed_override(a.seed);
    let impls: Vec<StructureKind> = a
        .impls
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<StructureKind>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let mut out = String::from("impl,workload,op,ops,mean_comparisons,mean_links,mean_rank_steps\n");
    if a.suite != "none" {
        for &kind in &impls {
            // Per-op-class totals over all repetitions.
            let mut agg: BTreeMap<String, (u64, u64, u64, u64)> = BTreeMap::new();
            for rep in 0..a.reps {
                let rep_seed = seed.wrapping_add(rep as u64);
                let trace = match a.suite.as_str() {
                    "sort" => gen_sort(a.n, rep_seed),
                    "random" => gen_random(a.n, OpMix::STANDARD.for_kind(kind), rep_seed),
                    "dijkstra" => {
                        let graph = Graph::random(a.n, 5 * a.n, rep_seed);
                        dijkstra(&graph, 0, kind, kind.default_policy())
                            .map_err(|e| e.to_string())?
                            .trace
                    }
                    s => return Err(format!("unknown suite `{s}` (sort, random, dijkstra, none)")),
                };
                let report =
                    run_trace(&trace, RunOptions::new(kind)).map_err(|e| e.to_string())?;
                for row in &report.rows {
                    let e = agg.entry(row.op.clone()).or_default();
                    e.0 += 1;
                    e.1 += row.comparisons;
                    e.2 += row.links;
                    e.3 += row.rank_steps;
                }
            }
            for (op, (count, cmps, links, steps)) in agg {
                let c = count as f64;
                out.push_str(&format!(
                    "{kind},{},{op},{count},{:.4},{:.4},{:.4}\n",
                    a.suite,
                    cmps as f64 / c,
                    links as f64 / c,
                    steps as f64 / c
                ));
            }
        }
    }
    write_output(&a.metrics, &out)
}

fn cmd_dot(a: DotArgs) -> Result<(), String> {
    let text = read_input(&a.trace)?;
    let trace = Trace::parse(&text).map_err(|e| e.to_string())?;
    let policy = a.policy.unwrap_or(a.kind.default_policy());
    let mut ex = Executor::new(a.kind, policy);
    for (i, op) in trace.ops.iter().enumerate() {
        if let heapbench::oracle::OpOutcome::Error(kind) = ex.apply(op) {
            return Err(format!("op {i} ({}): {kind} error", op.name()));
        }
    }
    let h = match &a.heap {
        Some(name) => ex.heap_id(name).ok_or_else(|| format!("no heap named `{name}`"))?,
        None => {
            let live = ex.live_heaps();
            match live[..] {
                [(_, h)] => h,
                _ => return Err(format!("{} live heaps; pick one with --heap", live.len())),
            }
        }
    };
    let dot = export_dot(&ex.arena, h, a.view).map_err(|e| e.to_string())?;
    write_output(&a.out, &dot)
}

fn cmd_adversary(a: AdversaryArgs) -> Result<(), String> {
    match a.attack.as_str() {
        "varianta" => {
            let mut adv = if a.skeleton {
                build_varianta_skeleton(a.b, a.k)
            } else {
                build_varianta_perfect(a.b, a.k)
            }
            .map_err(|e| e.to_string())?;
            println!(
                "varianta b={} k={} n={} ({})",
                a.b,
                a.k,
                adv.arena.len(adv.h).map_err(|e| e.to_string())?,
                if a.skeleton { "skeleton" } else { "perfect" }
            );
            println!("cycle,decrease_keys,rank_steps,comparisons,links");
            for cycle in 0..a.cycles.max(1) {
                let s = run_varianta_cycle(&mut adv, a.b, a.k).map_err(|e| e.to_string())?;
                println!(
                    "{cycle},{},{},{},{}",
                    s.decrease_keys, s.rank_steps, s.comparisons, s.links
                );
            }
            if let Some(path) = a.trace {
                fs::write(&path, adv.trace.to_string())
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(())
        }
        "capped" => {
            let mut adv = build_capped_instance(a.d, a.k).map_err(|e| e.to_string())?;
            let n = adv.arena.len(adv.h).map_err(|e| e.to_string())?;
            let mut control = control_rp1(n, seed_override(1)).map_err(|e| e.to_string())?;
            run_insert_deletemin_attack(&mut control, 64).map_err(|e| e.to_string())?;
            let attacked =
                run_insert_deletemin_attack(&mut adv, a.cycles).map_err(|e| e.to_string())?;
            let healthy =
                run_insert_deletemin_attack(&mut control, a.cycles).map_err(|e| e.to_string())?;
            println!("capped d={} k={} n={n}", a.d, a.k);
            println!("cycle,attacked_trees,attacked_comparisons,control_trees,control_comparisons");
            for (i, (at, ct)) in attacked.iter().zip(&healthy).enumerate() {
                println!(
                    "{i},{},{},{},{}",
                    at.trees_processed, at.comparisons, ct.trees_processed, ct.comparisons
                );
            }
            if let Some(path) = a.trace {
                fs::write(&path, adv.trace.to_string())
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(())
        }
        s => Err(format!("unknown attack `{s}` (varianta, capped)")),
    }
}

