//! The benchmark protocol: `R` placements per randomized algorithm, each
//! scored on `M` demand realizations of `k` riders.
//!
//! By default every run of every algorithm sees the same `M` realizations
//! (common random numbers). With `independent_demand` run `r` draws its own.

use std::time::{Duration, Instant};

use robotaxi_core::algorithms::{
    rp_place, rrp_place, tree_dp_solve, uckm_solve, vrrp_place, UckmStatus,
};
use robotaxi_core::eval::{mean_and_stderr, realization_costs, sample_realization, Z95};
use robotaxi_core::rng::{derive_seed, domain};
use robotaxi_core::{InstanceBundle, Placement};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

const DEMAND_LABEL: u64 = 0x4445_4d41;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Algo {
    Rp,
    Vrrp,
    Rrp,
    TreeDp,
    Uckm,
    Fixed(Placement),
}

impl Algo {
    pub fn name(&self) -> &'static str {
        match self {
            Algo::Rp => "rp",
            Algo::Vrrp => "vrrp",
            Algo::Rrp => "rrp",
            Algo::TreeDp => "tree-dp",
            Algo::Uckm => "uckm",
            Algo::Fixed(_) => "fixed",
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, Algo::Rp | Algo::Vrrp | Algo::Rrp)
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "rp" => Ok(Algo::Rp),
            "vrrp" => Ok(Algo::Vrrp),
            "rrp" => Ok(Algo::Rrp),
            "tree-dp" => Ok(Algo::TreeDp),
            "uckm" => Ok(Algo::Uckm),
            other => Err(CliError::Invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub algos: Vec<Algo>,
    pub runs: usize,
    pub demand_sets: usize,
    pub seed: u64,
    pub independent_demand: bool,
    pub gap_tol: f64,
    pub time_limit: Option<Duration>,
    pub timings: bool,
}

/// One summary line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algo: String,
    pub runs: usize,
    pub demand_sets: usize,
    pub k: usize,
    pub mean_per_rider_eta: f64,
    pub std_error: f64,
    pub ci95_halfwidth: f64,
    /// `runs` when the interval is across run means, `realizations` for
    /// algorithms run once.
    pub ci_basis: String,
    pub min_per_rider_eta: f64,
    pub best_run: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uckm_status: Option<UckmStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uckm_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRecord {
    pub algo: String,
    pub run: usize,
    pub realization: usize,
    pub total_cost: f64,
    pub per_rider_eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub k: usize,
    pub n: usize,
    pub runs: usize,
    pub demand_sets: usize,
    pub common_random_numbers: bool,
    /// SHA-256 of the realization count vectors, in the order scored.
    pub realization_digest: String,
    pub rows: Vec<BenchRow>,
    #[serde(skip)]
    pub records: Vec<ScatterRecord>,
}

/// Seed of the demand stream scored by run `run`.
pub fn demand_seed(seed: u64, run: usize, independent: bool) -> u64 {
    let base = derive_seed(seed, DEMAND_LABEL);
    if independent {
        derive_seed(base, run as u64 + 1)
    } else {
        base
    }
}

/// Seed of the placement drawn in run `run`.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    derive_seed(derive_seed(seed, domain::RUN), run as u64)
}

fn digest_realizations(bundle: &InstanceBundle, seeds: &[u64], m: usize) -> String {
    let sampler = bundle.demand.sampler();
    let mut h = Sha256::new();
    for &s in seeds {
        for j in 0..m as u64 {
            let x = sample_realization(&sampler, bundle.n(), bundle.k, s, j);
            for c in x.counts() {
                h.update(c.to_le_bytes());
            }
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn place_once(
    bundle: &InstanceBundle,
    algo: &Algo,
    seed: u64,
    cfg: &BenchConfig,
) -> Result<(Placement, Option<(UckmStatus, f64)>)> {
    let k = bundle.k;
    Ok(match algo {
        Algo::Rp => (rp_place(&bundle.demand, k, seed), None),
        Algo::Vrrp => (vrrp_place(&bundle.demand, k, seed), None),
        Algo::Rrp => (rrp_place(bundle, seed)?, None),
        Algo::TreeDp => {
            let tree = bundle
                .tree
                .as_ref()
                .ok_or_else(|| CliError::Invalid("tree-dp needs a tree bundle".into()))?;
            let (s, _, _) = tree_dp_solve(tree, k)?;
            (tree.to_original(&s), None)
        }
        Algo::Uckm => {
            let sol = uckm_solve(
                &bundle.metric,
                &bundle.demand,
                k,
                cfg.gap_tol,
                cfg.time_limit,
            )?;
            (sol.placement, Some((sol.status, sol.optimality_gap)))
        }
        Algo::Fixed(s) => {
            if s.k() != k || s.n() != bundle.n() {
                return Err(robotaxi_core::Error::KMismatch {
                    expected: k,
                    found: s.k(),
                }
                .into());
            }
            (s.clone(), None)
        }
    })
}

/// Runs the protocol.
pub fn cmd_bench(bundle: &InstanceBundle, cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.runs == 0 || cfg.demand_sets == 0 {
        return Err(CliError::Invalid(
            "runs and demand sets must be at least 1".into(),
        ));
    }
    let k = bundle.k;
    let kf = k as f64;
    let m = cfg.demand_sets;
    let seeds: Vec<u64> = if cfg.independent_demand {
        (0..cfg.runs)
            .map(|r| demand_seed(cfg.seed, r, true))
            .collect()
    } else {
        vec![demand_seed(cfg.seed, 0, false)]
    };
    let realization_digest = digest_realizations(bundle, &seeds, m);

    let mut rows = Vec::new();
    let mut records = Vec::new();
    for algo in &cfg.algos {
        let start = Instant::now();
        let runs = if algo.is_randomized() { cfg.runs } else { 1 };
        let mut run_means = Vec::with_capacity(runs);
        let mut last_costs = Vec::new();
        let mut uckm = None;
        for r in 0..runs {
            let (s, info) = place_once(bundle, algo, run_seed(cfg.seed, r), cfg)?;
            uckm = uckm.or(info);
            let costs = realization_costs(
                &bundle.metric,
                &bundle.demand,
                &s,
                m,
                demand_seed(cfg.seed, r, cfg.independent_demand),
            )?;
            let per_rider: Vec<f64> = costs.iter().map(|c| c / kf).collect();
            run_means.push(mean_and_stderr(&per_rider).0);
            for (j, (&c, &p)) in costs.iter().zip(&per_rider).enumerate() {
                records.push(ScatterRecord {
                    algo: algo.name().to_string(),
                    run: r,
                    realization: j,
                    total_cost: c,
                    per_rider_eta: p,
                });
            }
            last_costs = per_rider;
        }
        let (mean, se, basis) = if runs > 1 {
            let (mean, se) = mean_and_stderr(&run_means);
            (mean, se, "runs")
        } else {
            let (mean, se) = mean_and_stderr(&last_costs);
            (mean, se, "realizations")
        };
        let (best_run, min) =
            run_means
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
                );
        rows.push(BenchRow {
            algo: algo.name().to_string(),
            runs,
            demand_sets: m,
            k,
            mean_per_rider_eta: mean,
            std_error: se,
            ci95_halfwidth: Z95 * se,
            ci_basis: basis.to_string(),
            min_per_rider_eta: min,
            best_run,
            uckm_status: uckm.map(|u| u.0),
            uckm_gap: uckm.map(|u| u.1),
            wall_time_s: cfg.timings.then(|| start.elapsed().as_secs_f64()),
        });
    }
    Ok(BenchReport {
        seed: cfg.seed,
        k,
        n: bundle.n(),
        runs: cfg.runs,
        demand_sets: m,
        common_random_numbers: !cfg.independent_demand,
        realization_digest,
        rows,
        records,
    })
}

/// Scatter records as CSV with columns
/// `algo,run,realization,total_cost,per_rider_eta`.
pub fn write_records_csv<W: std::io::Write>(records: &[ScatterRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width summary for terminals.
pub fn summary_table(report: &BenchReport) -> String {
    let mut out = format!(
        "{:<8} {:>5} {:>6} {:>12} {:>10} {:>12}\n",
        "algo", "runs", "M", "mean/rider", "ci95", "min/rider"
    );
    for r in &report.rows {
        out.push_str(&format!(
            "{:<8} {:>5} {:>6} {:>12.6} {:>10.6} {:>12.6}\n",
            r.algo,
            r.runs,
            r.demand_sets,
            r.mean_per_rider_eta,
            r.ci95_halfwidth,
            r.min_per_rider_eta
        ));
    }
    out
}
