//! `spatialmix` command line: exact counts, walk-tree checks, branching
//! matrices, decay certificates, capacity estimates, the kings-lattice
//! recursion, and reproduction of the reference tables.
//!
//! Every subcommand prints one JSON document to stdout whose bytes depend
//! only on the inputs; the run manifest (which records the wall time) goes
//! to stderr.  Exit status: 0 on success, 2 when a checked tolerance
//! fails, 3 on input errors.

mod emit;
mod reproduce;

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use spatialmix::branching::build_matrix;
use spatialmix::capacity::estimate_capacity;
use spatialmix::certify::{certify, certify_best};
use spatialmix::exactcount::{count, count_independent_sets, log2_biguint, Configuration};
use spatialmix::lattice::{Constraint, FiniteRegion, NeighborOrder};
use spatialmix::nakdynamics::{iterate_gap, solve_fixed_point};
use spatialmix::sawtree::{
    build_saw_tree, check_theorem_saw, evaluate_ratios, root_probability, Graph,
};

use emit::{print_json, sig10_str, write_atomic, RunManifest};
use reproduce::{run_targets, Target};

#[derive(Parser)]
#[command(
    name = "spatialmix",
    version,
    about = "Exact counts, mixing certificates, and capacity estimates for two-dimensional constrained codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count the codewords of an m x n box, optionally under fixed sites
    Count(CountArgs),
    /// Compare a vertex's exact marginal with its walk-tree marginal
    SawCheck(SawCheckArgs),
    /// Build a branching matrix, write its text form, report its Perron root
    Bm(BmArgs),
    /// Decide the spectral decay certificate at cycle bound l
    Certify(CertifyArgs),
    /// Estimate capacity by growing conditioned windows until increments stall
    Capacity(CapacityArgs),
    /// Iterate the kings-lattice boundary gap and emit the series
    NakGap(NakGapArgs),
    /// Solve the kings-lattice ratio recursion's fixed point and classify it
    NakFixedpoint,
    /// Regenerate the reference tables and figure data, checking every cell
    Reproduce(ReproduceArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version land here too; only genuine parse
            // failures count as input errors
            let code = if err.use_stderr() { 3 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(3);
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Count(a) => run_count(a),
        Command::SawCheck(a) => run_saw_check(a),
        Command::Bm(a) => run_bm(a),
        Command::Certify(a) => run_certify(a),
        Command::Capacity(a) => run_capacity(a),
        Command::NakGap(a) => run_nak_gap(a),
        Command::NakFixedpoint => run_nak_fixed_point(),
        Command::Reproduce(a) => run_reproduce(a),
    }
}

// ---------------------------------------------------------------------------
// count

#[derive(Args)]
struct CountArgs {
    /// constraint: hs, hh, rwim, or nak
    #[arg(long)]
    cons: String,
    /// number of rows
    #[arg(long)]
    m: usize,
    /// number of columns
    #[arg(long)]
    n: usize,
    /// JSON file fixing sites: an array of [row, col, value] with value 0 or 1
    #[arg(long)]
    fix: Option<PathBuf>,
}

fn run_count(args: &CountArgs) -> Result<i32> {
    let started = Instant::now();
    let cons: Constraint = args.cons.parse()?;
    let region = FiniteRegion::rect(cons, args.m, args.n)?;
    let mut fixed = Configuration::empty();
    let mut fix_name = String::new();
    if let Some(path) = &args.fix {
        fix_name = path.display().to_string();
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let triples: Vec<(i64, i64, u8)> = serde_json::from_str(&text).with_context(|| {
            format!("parsing {}: expected [[row, col, 0|1], ...]", path.display())
        })?;
        for (i, j, v) in triples {
            if v > 1 {
                bail!("fixed value must be 0 or 1, got {v} at ({i}, {j})");
            }
            fixed.set((i, j), v == 1);
        }
    }
    let manifest = RunManifest::new(
        "count",
        &[
            ("cons", cons.name().to_string()),
            ("m", args.m.to_string()),
            ("n", args.n.to_string()),
            ("fix", fix_name),
        ],
    );
    let result = count(&region, &fixed)?;
    print_json(&json!({
        "cons": cons.name(),
        "m": args.m,
        "n": args.n,
        "fixedSites": fixed.len(),
        "count": result.count.to_string(),
        "log2count": result.log2,
        "manifest": manifest.hash,
    }))?;
    manifest.finish(started)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// saw-check

#[derive(Args)]
struct SawCheckArgs {
    /// JSON graph file: {"n": 5, "edges": [[0,1], ...], "fixed": [[vertex, 0|1], ...]}
    #[arg(long)]
    graph: PathBuf,
    /// vertex whose unoccupied marginal is compared
    #[arg(long)]
    root: usize,
    /// walk-tree depth cap; omitted means the full tree (exact equality)
    #[arg(long)]
    depth: Option<usize>,
    /// tolerance on |graph marginal - tree marginal|
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(default)]
    fixed: Vec<(usize, u8)>,
}

fn run_saw_check(args: &SawCheckArgs) -> Result<i32> {
    let started = Instant::now();
    let text = fs::read_to_string(&args.graph)
        .with_context(|| format!("reading {}", args.graph.display()))?;
    let gf: GraphFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.graph.display()))?;
    let g = Graph::from_edges(gf.n, &gf.edges)?;
    let mut fixed = HashMap::new();
    for &(v, b) in &gf.fixed {
        if b > 1 {
            bail!("fixed value must be 0 or 1, got {b} at vertex {v}");
        }
        if v >= gf.n {
            bail!("fixed vertex {v} out of range for {} vertices", gf.n);
        }
        fixed.insert(v, b == 1);
    }
    if args.root >= gf.n {
        bail!("root {} out of range for {} vertices", args.root, gf.n);
    }
    if fixed.contains_key(&args.root) {
        bail!("the root vertex must be free");
    }
    let manifest = RunManifest::new(
        "saw-check",
        &[
            ("graph", args.graph.display().to_string()),
            ("root", args.root.to_string()),
            (
                "depth",
                args.depth.map(|d| d.to_string()).unwrap_or_default(),
            ),
            ("tol", args.tol.to_string()),
        ],
    );
    let (p_graph, p_tree) = match args.depth {
        None => check_theorem_saw(&g, args.root, &fixed)?,
        Some(depth) => {
            // exact marginal on the graph side, capped tree on the other
            let n = g.len();
            let mut fix_vec: Vec<Option<bool>> = vec![None; n];
            for (&v, &b) in &fixed {
                fix_vec[v] = Some(b);
            }
            let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).to_vec()).collect();
            let all = count_independent_sets(&adj, &fix_vec)?;
            let mut rooted = fix_vec.clone();
            rooted[args.root] = Some(false);
            let unoccupied = count_independent_sets(&adj, &rooted)?;
            let p_graph = (log2_biguint(&unoccupied) - log2_biguint(&all)).exp2();
            let tree = build_saw_tree(&g, args.root, depth, false)?;
            let ratios = evaluate_ratios(&tree, &fixed, &HashMap::new());
            (p_graph, root_probability(&tree, &ratios))
        }
    };
    let diff = (p_graph - p_tree).abs();
    let pass = diff <= args.tol;
    print_json(&json!({
        "graph": args.graph.display().to_string(),
        "root": args.root,
        "depth": args.depth,
        "graphMarginal": p_graph,
        "treeMarginal": p_tree,
        "diff": diff,
        "tol": args.tol,
        "pass": pass,
        "manifest": manifest.hash,
    }))?;
    manifest.finish(started)?;
    Ok(if pass { 0 } else { 2 })
}

// ---------------------------------------------------------------------------
// bm

#[derive(Args)]
struct BmArgs {
    /// constraint: hs, hh, rwim, or nak
    #[arg(long)]
    cons: String,
    /// cycle bound (even, at least 4)
    #[arg(long)]
    l: usize,
    /// apply the clockwise neighbor order (pruned matrix)
    #[arg(long)]
    order: bool,
    /// explicit comma-separated ranking, e.g. "NE,E,SE,SW,W,NW"; implies --order
    #[arg(long)]
    order_spec: Option<String>,
    /// output file; defaults to {cons}_l{l}_{ord|unord}.bm
    #[arg(long)]
    out: Option<PathBuf>,
    /// power-iteration residual tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

fn run_bm(args: &BmArgs) -> Result<i32> {
    let started = Instant::now();
    let cons: Constraint = args.cons.parse()?;
    let ordered = args.order || args.order_spec.is_some();
    let order = match &args.order_spec {
        Some(spec) => Some(NeighborOrder::parse(cons, spec)?),
        None if ordered => Some(NeighborOrder::default_for(cons)),
        None => None,
    };
    let mut manifest = RunManifest::new(
        "bm",
        &[
            ("cons", cons.name().to_string()),
            ("l", args.l.to_string()),
            (
                "order",
                order.as_ref().map(|o| o.to_string()).unwrap_or_default(),
            ),
            ("tol", args.tol.to_string()),
        ],
    );
    let matrix = build_matrix(cons, args.l, order.as_ref())?;
    let spectral = matrix.spectral_radius(args.tol)?;
    let path = args.out.clone().unwrap_or_else(|| {
        PathBuf::from(format!(
            "{}_l{}_{}.bm",
            cons.name(),
            args.l,
            if ordered { "ord" } else { "unord" }
        ))
    });
    let mut text = format!("# manifest: {}\n", manifest.hash);
    text.push_str(&matrix.to_text());
    write_atomic(&path, text.as_bytes())?;
    manifest.record_output(&path);
    print_json(&json!({
        "cons": cons.name(),
        "l": args.l,
        "ordered": ordered,
        "order": order.as_ref().map(|o| o.to_string()),
        "ntypes": matrix.size(),
        "lambdaStar": spectral.lambda,
        "residual": spectral.residual,
        "file": path.display().to_string(),
        "manifest": manifest.hash,
    }))?;
    manifest.finish(started)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// certify

#[derive(Args)]
struct CertifyArgs {
    /// constraint: hs, hh, rwim, or nak
    #[arg(long)]
    cons: String,
    /// cycle bound (even, at least 4)
    #[arg(long)]
    l: usize,
    /// apply the clockwise neighbor order
    #[arg(long)]
    order: bool,
    /// explicit comma-separated ranking; implies --order
    #[arg(long)]
    order_spec: Option<String>,
    /// try every canonical order and keep the smallest Perron root
    #[arg(long)]
    best: bool,
    /// safety margin subtracted from the decay threshold
    #[arg(long, default_value_t = 0.0)]
    margin: f64,
}

fn run_certify(args: &CertifyArgs) -> Result<i32> {
    let started = Instant::now();
    let cons: Constraint = args.cons.parse()?;
    let manifest = RunManifest::new(
        "certify",
        &[
            ("cons", cons.name().to_string()),
            ("l", args.l.to_string()),
            ("order", args.order_spec.clone().unwrap_or_else(|| {
                if args.best {
                    "best".to_string()
                } else if args.order {
                    NeighborOrder::default_for(cons).to_string()
                } else {
                    String::new()
                }
            })),
            ("margin", args.margin.to_string()),
        ],
    );
    let (cert, order) = if args.best {
        let (cert, order) = certify_best(cons, args.l, args.margin)?;
        (cert, Some(order))
    } else {
        let ordered = args.order || args.order_spec.is_some();
        let order = match &args.order_spec {
            Some(spec) => Some(NeighborOrder::parse(cons, spec)?),
            None if ordered => Some(NeighborOrder::default_for(cons)),
            None => None,
        };
        (certify(cons, args.l, order.as_ref(), args.margin)?, order)
    };
    let mut v = serde_json::to_value(&cert)?;
    v["order"] = json!(order.as_ref().map(|o| o.to_string()));
    v["manifest"] = json!(manifest.hash);
    print_json(&v)?;
    manifest.finish(started)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// capacity

#[derive(Args)]
struct CapacityArgs {
    /// constraint: hs, hh, rwim, or nak
    #[arg(long)]
    cons: String,
    /// stop once successive estimates differ by at most this
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// largest window radius to try
    #[arg(long, default_value_t = 6)]
    t_max: usize,
}

fn run_capacity(args: &CapacityArgs) -> Result<i32> {
    let started = Instant::now();
    let cons: Constraint = args.cons.parse()?;
    let manifest = RunManifest::new(
        "capacity",
        &[
            ("cons", cons.name().to_string()),
            ("eps", args.eps.to_string()),
            ("tMax", args.t_max.to_string()),
        ],
    );
    let estimate = estimate_capacity(cons, args.eps, args.t_max)?;
    let mut v = serde_json::to_value(&estimate)?;
    v["manifest"] = json!(manifest.hash);
    print_json(&v)?;
    manifest.finish(started)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// nak-gap / nak-fixedpoint

#[derive(Args)]
struct NakGapArgs {
    /// number of recursion levels
    #[arg(long, default_value_t = 200)]
    depth: usize,
    /// also write the (depth, gap) rows to this CSV file
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn run_nak_gap(args: &NakGapArgs) -> Result<i32> {
    let started = Instant::now();
    // the CSV destination is plumbing, recorded under outputs, so it is
    // left out of the hashed parameters
    let mut manifest = RunManifest::new("nak-gap", &[("depth", args.depth.to_string())]);
    let gaps = iterate_gap(args.depth)?;
    if let Some(path) = &args.csv {
        let mut csv = format!("# manifest: {}\n", manifest.hash);
        csv.push_str("depth,gap\n");
        for (k, g) in gaps.iter().enumerate() {
            csv.push_str(&format!("{},{}\n", k + 1, sig10_str(*g)));
        }
        write_atomic(path, csv.as_bytes())?;
        manifest.record_output(path);
    }
    print_json(&json!({
        "depth": args.depth,
        "firstGap": gaps.first(),
        "tail": gaps.last(),
        "gaps": gaps,
        "manifest": manifest.hash,
    }))?;
    manifest.finish(started)?;
    Ok(0)
}

fn run_nak_fixed_point() -> Result<i32> {
    let started = Instant::now();
    let manifest = RunManifest::new("nak-fixedpoint", &[]);
    let report = solve_fixed_point()?;
    let mut v = serde_json::to_value(&report)?;
    v["manifest"] = json!(manifest.hash);
    print_json(&v)?;
    manifest.finish(started)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// reproduce

#[derive(Args)]
struct ReproduceArgs {
    /// table1..table6, fig4, gamma, nak-fixedpoint, or all
    #[arg(value_name = "TARGET")]
    target: String,
    /// directory receiving the CSV/JSON artifacts
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn run_reproduce(args: &ReproduceArgs) -> Result<i32> {
    let started = Instant::now();
    let target = Target::parse(&args.target)?;
    // the output directory is plumbing, recorded under outputs, so it is
    // left out of the hashed parameters
    let mut manifest = RunManifest::new("reproduce", &[("target", target.name().to_string())]);
    let targets = target.expand();
    let reports = run_targets(&targets, &manifest.hash)?;
    let mut all_pass = true;
    for report in &reports {
        for (name, bytes) in &report.files {
            let path = args.out_dir.join(name);
            write_atomic(&path, bytes)?;
            manifest.record_output(&path);
        }
        for line in &report.lines {
            println!(
                "[{}] {} - {}",
                if line.pass { "PASS" } else { "FAIL" },
                line.cell,
                line.detail
            );
        }
        all_pass &= report.pass;
    }
    println!(
        "reproduce {}: {}",
        target.name(),
        if all_pass { "PASS" } else { "FAIL" }
    );
    manifest.finish(started)?;
    Ok(if all_pass { 0 } else { 2 })
}
