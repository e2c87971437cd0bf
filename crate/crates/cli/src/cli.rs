//! Argument definitions and command dispatch.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use robotaxi_core::algorithms::{
    rp_place, rrp_place, tree_dp_solve, uckm_solve, vrrp_place, UckmLogEntry, UckmStatus,
};
use robotaxi_core::eval::{exact_cost_enumeration, mc_cost, tree_exact_cost, CostEstimate};
use robotaxi_core::instances::{
    full_cover_bound, gen_coverage_reduction, gen_full_cover_system, gen_random_distribution,
    gen_random_euclidean, gen_random_tree, gen_star, partial_cover_reference, CoverageInstance,
    DEFAULT_EPSILON,
};
use robotaxi_core::matching::{wasserstein, TransportPlan};
use robotaxi_core::{load_bundle, InstanceBundle, Placement};
use serde::Serialize;

use crate::bench::{cmd_bench, run_seed, summary_table, write_records_csv, Algo, BenchConfig};
use crate::error::{CliError, Result};
use crate::ingest::{ingest_trips, read_zone_map, DEFAULT_ZONE_COLUMN};

#[derive(Debug, Parser)]
#[command(
    name = "robotaxi",
    version,
    about = "Vehicle placement against random demand"
)]
pub struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Fleet size; overrides the bundle's k.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write per-realization records here (bench only).
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a bundle or coverage instance file.
    Validate { file: PathBuf },
    /// Generate an instance bundle.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Compute a placement.
    Place(PlaceArgs),
    /// Expected cost of a placement.
    Evaluate(EvaluateArgs),
    /// Benchmark several algorithms on shared demand.
    Bench(BenchArgs),
    /// Empirical demand distribution from trip records.
    Ingest(IngestArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Star: center 0 at distance 1 from n-1 leaves, demand on the leaves.
    Star {
        #[arg(long)]
        n: usize,
    },
    /// Coverage reduction gadget.
    Coverage {
        /// Coverage instance JSON; otherwise a full cover system is built.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long = "elements", default_value_t = 4)]
        elements: usize,
        #[arg(long = "budget", default_value_t = 2)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        decoys: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Uniform points in the unit square with Dirichlet demand.
    Euclidean {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        concentration: f64,
    },
    /// Random recursive tree with Dirichlet demand.
    Tree {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlaceAlgo {
    Rp,
    Vrrp,
    Rrp,
    TreeDp,
    Uckm,
}

#[derive(Debug, Args)]
pub struct UckmArgs {
    /// Relative optimality gap at which UCkM stops.
    #[arg(long, default_value_t = 0.0)]
    pub gap: f64,
    /// Wall-clock limit for UCkM in seconds.
    #[arg(long = "time-limit-s")]
    pub time_limit_s: Option<f64>,
}

impl UckmArgs {
    fn time_limit(&self) -> Result<Option<Duration>> {
        self.time_limit_s
            .map(|s| {
                Duration::try_from_secs_f64(s)
                    .map_err(|_| CliError::Invalid(format!("bad time limit {s}")))
            })
            .transpose()
    }
}

#[derive(Debug, Args)]
pub struct PlaceArgs {
    #[arg(value_enum)]
    pub algo: PlaceAlgo,
    pub bundle: PathBuf,
    #[command(flatten)]
    pub uckm: UckmArgs,
    /// Include the transport plan (uckm) in the output.
    #[arg(long)]
    pub dump_plan: bool,
    /// VRRP: draw this many placements and keep the best by estimated cost.
    #[arg(long, default_value_t = 1)]
    pub best_of: usize,
    /// VRRP best-of: realizations used to estimate each candidate.
    #[arg(long, default_value_t = 100)]
    pub estimate_samples: usize,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "mode")]
pub struct EvalMode {
    /// Monte Carlo with this many realizations.
    #[arg(long)]
    pub mc: Option<usize>,
    /// Sum over every realization.
    #[arg(long)]
    pub exact: bool,
    /// Closed form on the bundle's tree.
    #[arg(long)]
    pub tree_exact: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub bundle: PathBuf,
    /// Placement: JSON file holding a counts array or a `place` output.
    #[arg(long, conflicts_with = "counts")]
    pub placement: Option<PathBuf>,
    /// Placement as comma-separated counts.
    #[arg(long)]
    pub counts: Option<String>,
    #[command(flatten)]
    pub mode: EvalMode,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub bundle: PathBuf,
    /// Comma-separated algorithms: rp, vrrp, rrp, tree-dp, uckm.
    #[arg(long, default_value = "rp,vrrp")]
    pub algos: String,
    /// Extra row for a fixed placement given as comma-separated counts.
    #[arg(long)]
    pub fixed: Option<String>,
    /// Placements per randomized algorithm (R).
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    /// Demand realizations per placement (M).
    #[arg(long, default_value_t = 100)]
    pub realizations: usize,
    /// Give each run its own realizations instead of sharing them.
    #[arg(long)]
    pub independent_demand: bool,
    /// Include wall times (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub uckm: UckmArgs,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub trips: PathBuf,
    /// Number of zones n.
    #[arg(long)]
    pub zones: usize,
    #[arg(long, default_value = DEFAULT_ZONE_COLUMN)]
    pub column: String,
    /// CSV `raw_id,index` mapping sparse zone ids to 0..n.
    #[arg(long)]
    pub zone_map: Option<PathBuf>,
}

#[derive(Serialize)]
struct ValidateOutput {
    valid: bool,
    message: &'static str,
    kind: &'static str,
    n: usize,
    k: usize,
    has_tree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    hardness_regime: Option<bool>,
}

#[derive(Serialize)]
struct UckmReport {
    status: UckmStatus,
    objective: f64,
    lower_bound: f64,
    optimality_gap: f64,
    nodes: u64,
    log: Vec<UckmLogEntry>,
}

#[derive(Serialize)]
struct PlaceOutput {
    algo: &'static str,
    seed: u64,
    n: usize,
    k: usize,
    placement: Placement,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<CostEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    uckm: Option<UckmReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transport: Option<TransportPlan>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Value {
    Exact(f64),
    Estimate(CostEstimate),
}

#[derive(Serialize)]
struct EvaluateOutput {
    mode: &'static str,
    k: usize,
    total: Value,
    per_rider: Value,
}

#[derive(Serialize)]
struct IngestOutput {
    n: usize,
    trips: u64,
    probs: Vec<f64>,
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn bundle_with_k(path: &Path, k: Option<usize>) -> Result<InstanceBundle> {
    let mut b = load_bundle(path)?;
    if let Some(k) = k {
        b = InstanceBundle::new(b.metric, b.demand, k, b.allowable, b.tree)?;
    }
    Ok(b)
}

fn need_k(k: Option<usize>) -> Result<usize> {
    k.ok_or_else(|| CliError::Invalid("--k is required".into()))
}

pub fn parse_counts(text: &str) -> Result<Placement> {
    let counts = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Invalid(format!("bad count {t:?}")))
        })
        .collect::<Result<Vec<u32>>>()?;
    Ok(Placement::from_counts(counts)?)
}

fn read_placement(path: &Path) -> Result<Placement> {
    let v: serde_json::Value = serde_json::from_str(&read_text(path)?)?;
    let inner = v.get("placement").cloned().unwrap_or(v);
    Ok(serde_json::from_value(inner)?)
}

/// Runs one command and returns the JSON text (and optional CSV records).
pub fn execute(cli: &Cli) -> Result<(String, Option<String>)> {
    match &cli.command {
        Command::Validate { file } => validate(file).map(|s| (s, None)),
        Command::Gen(g) => generate(g, cli).map(|s| (s, None)),
        Command::Place(p) => place(p, cli).map(|s| (s, None)),
        Command::Evaluate(e) => evaluate(e, cli).map(|s| (s, None)),
        Command::Bench(b) => bench(b, cli),
        Command::Ingest(i) => ingest(i).map(|s| (s, None)),
    }
}

fn validate(file: &Path) -> Result<String> {
    let text = read_text(file)?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    if v.get("sets").is_some() {
        let cov = CoverageInstance::from_json_str(&text)?;
        let b = gen_coverage_reduction(&cov)?;
        return to_json(&ValidateOutput {
            valid: true,
            message: "valid metric",
            kind: "coverage",
            n: b.n(),
            k: b.k,
            has_tree: false,
            hardness_regime: Some(cov.in_hardness_regime()),
        });
    }
    let base = file.parent();
    let b = InstanceBundle::from_json_str(&text, base)?;
    to_json(&ValidateOutput {
        valid: true,
        message: "valid metric",
        kind: "bundle",
        n: b.n(),
        k: b.k,
        has_tree: b.tree.is_some(),
        hardness_regime: None,
    })
}

fn generate(g: &GenCommand, cli: &Cli) -> Result<String> {
    let b = match g {
        GenCommand::Star { n } => gen_star(*n, need_k(cli.k)?)?,
        GenCommand::Coverage {
            instance,
            elements,
            budget,
            decoys,
            epsilon,
        } => {
            let cov = match instance {
                Some(p) => CoverageInstance::from_json_str(&read_text(p)?)?,
                None => gen_full_cover_system(*elements, *budget, *decoys, *epsilon, cli.seed)?,
            };
            eprintln!(
                "reference: full-cover placement bound {:.6} (epsilon {})",
                full_cover_bound(cov.budget),
                cov.epsilon
            );
            if cov.in_hardness_regime() {
                eprintln!(
                    "reference: partial-cover reference {:.6}",
                    partial_cover_reference(cov.budget, cov.epsilon)
                );
            }
            gen_coverage_reduction(&cov)?
        }
        GenCommand::Euclidean { n, concentration } => {
            let m = gen_random_euclidean(*n, cli.seed)?;
            let d = gen_random_distribution(*n, cli.seed, *concentration)?;
            InstanceBundle::new(m, d, need_k(cli.k)?, None, None)?
        }
        GenCommand::Tree { n } => {
            InstanceBundle::from_tree(gen_random_tree(*n, cli.seed)?, need_k(cli.k)?)?
        }
    };
    let mut s = b.to_json_string();
    s.push('\n');
    Ok(s)
}

fn place(p: &PlaceArgs, cli: &Cli) -> Result<String> {
    let b = bundle_with_k(&p.bundle, cli.k)?;
    let k = b.k;
    let mut out = PlaceOutput {
        algo: "",
        seed: cli.seed,
        n: b.n(),
        k,
        placement: Placement::all_at(b.n(), 0, k),
        cost: None,
        estimate: None,
        uckm: None,
        transport: None,
    };
    match p.algo {
        PlaceAlgo::Rp => {
            out.algo = "rp";
            out.placement = rp_place(&b.demand, k, cli.seed);
        }
        PlaceAlgo::Rrp => {
            out.algo = "rrp";
            out.placement = rrp_place(&b, cli.seed)?;
        }
        PlaceAlgo::Vrrp => {
            out.algo = "vrrp";
            if p.best_of <= 1 {
                out.placement = vrrp_place(&b.demand, k, cli.seed);
            } else {
                let mut best: Option<(Placement, CostEstimate)> = None;
                for r in 0..p.best_of {
                    let s = vrrp_place(&b.demand, k, run_seed(cli.seed, r));
                    let est = mc_cost(&b, &s, p.estimate_samples, cli.seed)?;
                    if best.as_ref().is_none_or(|(_, e)| est.mean < e.mean) {
                        best = Some((s, est));
                    }
                }
                let (s, est) = best.expect("best_of >= 2");
                out.placement = s;
                out.estimate = Some(est);
            }
        }
        PlaceAlgo::TreeDp => {
            out.algo = "tree-dp";
            let tree = b
                .tree
                .as_ref()
                .ok_or_else(|| CliError::Invalid("tree-dp needs a tree bundle".into()))?;
            let (s, v, _) = tree_dp_solve(tree, k)?;
            out.placement = tree.to_original(&s);
            out.cost = Some(v);
        }
        PlaceAlgo::Uckm => {
            out.algo = "uckm";
            let sol = uckm_solve(&b.metric, &b.demand, k, p.uckm.gap, p.uckm.time_limit()?)?;
            out.placement = sol.placement;
            out.cost = Some(sol.objective);
            out.uckm = Some(UckmReport {
                status: sol.status,
                objective: sol.objective,
                lower_bound: sol.lower_bound,
                optimality_gap: sol.optimality_gap,
                nodes: sol.nodes,
                log: sol.log,
            });
            if p.dump_plan {
                out.transport = Some(sol.transport);
            }
        }
    }
    if p.dump_plan && out.transport.is_none() {
        out.transport = Some(wasserstein(
            &b.metric,
            &out.placement.point_mass(),
            &b.demand,
        )?);
    }
    to_json(&out)
}

fn evaluate(e: &EvaluateArgs, cli: &Cli) -> Result<String> {
    let b = bundle_with_k(&e.bundle, cli.k)?;
    let s = match (&e.placement, &e.counts) {
        (Some(p), _) => read_placement(p)?,
        (None, Some(c)) => parse_counts(c)?,
        (None, None) => return Err(CliError::Invalid("give --placement or --counts".into())),
    };
    let kf = b.k as f64;
    let out = if let Some(samples) = e.mode.mc {
        let est = mc_cost(&b, &s, samples, cli.seed)?;
        EvaluateOutput {
            mode: "mc",
            k: b.k,
            per_rider: Value::Estimate(est.per_rider(b.k)),
            total: Value::Estimate(est),
        }
    } else if e.mode.exact {
        let v = exact_cost_enumeration(&b, &s)?;
        EvaluateOutput {
            mode: "exact",
            k: b.k,
            total: Value::Exact(v),
            per_rider: Value::Exact(v / kf),
        }
    } else {
        let tree = b
            .tree
            .as_ref()
            .ok_or_else(|| CliError::Invalid("--tree-exact needs a tree bundle".into()))?;
        let v = tree_exact_cost(tree, &s, b.k)?;
        EvaluateOutput {
            mode: "tree-exact",
            k: b.k,
            total: Value::Exact(v),
            per_rider: Value::Exact(v / kf),
        }
    };
    to_json(&out)
}

fn bench(a: &BenchArgs, cli: &Cli) -> Result<(String, Option<String>)> {
    let b = bundle_with_k(&a.bundle, cli.k)?;
    let mut algos = a
        .algos
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Algo::parse)
        .collect::<Result<Vec<_>>>()?;
    if let Some(f) = &a.fixed {
        algos.push(Algo::Fixed(parse_counts(f)?));
    }
    let cfg = BenchConfig {
        algos,
        runs: a.runs,
        demand_sets: a.realizations,
        seed: cli.seed,
        independent_demand: a.independent_demand,
        gap_tol: a.uckm.gap,
        time_limit: a.uckm.time_limit()?,
        timings: a.timings,
    };
    let report = cmd_bench(&b, &cfg)?;
    eprint!("{}", summary_table(&report));
    let csv = if cli.csv.is_some() {
        let mut buf = Vec::new();
        write_records_csv(&report.records, &mut buf)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        Some(String::from_utf8(buf).expect("csv is utf-8"))
    } else {
        None
    };
    Ok((to_json(&report)?, csv))
}

fn ingest(a: &IngestArgs) -> Result<String> {
    let map = a.zone_map.as_deref().map(read_zone_map).transpose()?;
    let (d, trips) = ingest_trips(&a.trips, a.zones, &a.column, map.as_ref())?;
    to_json(&IngestOutput {
        n: d.len(),
        trips,
        probs: d.probs().to_vec(),
    })
}
