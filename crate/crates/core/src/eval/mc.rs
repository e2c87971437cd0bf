use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mean_and_stderr;
use crate::bundle::InstanceBundle;
use crate::demand::{DemandDistribution, Sampler};
use crate::error::{Error, Result};
use crate::matching::matching_distance;
use crate::metric::MetricSpace;
use crate::placement::Placement;
use crate::rng::{domain, stream};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Monte Carlo estimate of an expected total matching cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub mean: f64,
    #[serde(rename = "stderr")]
    pub std_error: f64,
    #[serde(rename = "ci95")]
    pub ci95_halfwidth: f64,
    pub samples: usize,
    pub seed: u64,
}

impl CostEstimate {
    pub fn from_samples(costs: &[f64], seed: u64) -> Self {
        let (mean, std_error) = mean_and_stderr(costs);
        CostEstimate {
            mean,
            std_error,
            ci95_halfwidth: Z95 * std_error,
            samples: costs.len(),
            seed,
        }
    }

    /// Same estimate divided by the fleet size.
    pub fn per_rider(&self, k: usize) -> CostEstimate {
        let k = k as f64;
        CostEstimate {
            mean: self.mean / k,
            std_error: self.std_error / k,
            ci95_halfwidth: self.ci95_halfwidth / k,
            samples: self.samples,
            seed: self.seed,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        (value - self.mean).abs() <= self.ci95_halfwidth
    }
}

/// Demand realization `index` of the stream keyed by `seed`: `k` i.i.d.
/// draws from the sampler.
pub fn sample_realization(
    sampler: &Sampler,
    n: usize,
    k: usize,
    seed: u64,
    index: u64,
) -> Placement {
    let mut rng = stream(seed, domain::REALIZATION, index);
    let mut counts = vec![0u32; n];
    for _ in 0..k {
        counts[sampler.sample(&mut rng)] += 1;
    }
    Placement::from_counts(counts).expect("k >= 1")
}

/// Matching cost of `s` against realizations `0..samples`, in index order.
pub fn realization_costs(
    space: &MetricSpace,
    demand: &DemandDistribution,
    s: &Placement,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if s.n() != space.len() || demand.len() != space.len() {
        return Err(Error::DimensionMismatch {
            what: "placement",
            expected: space.len(),
            found: s.n(),
        });
    }
    let sampler = demand.sampler();
    let n = space.len();
    let k = s.k();
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let x = sample_realization(&sampler, n, k, seed, i);
            matching_distance(space, s, &x)
        })
        .collect()
}

pub fn mc_cost_with(
    space: &MetricSpace,
    demand: &DemandDistribution,
    s: &Placement,
    samples: usize,
    seed: u64,
) -> Result<CostEstimate> {
    if samples < 2 {
        return Err(Error::OutOfRange(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let costs = realization_costs(space, demand, s, samples, seed)?;
    Ok(CostEstimate::from_samples(&costs, seed))
}

/// Monte Carlo estimate of `E[d_k(s, X)]` over `samples` realizations.
///
/// The result depends only on `(seed, samples)`, not on the thread count.
pub fn mc_cost(
    bundle: &InstanceBundle,
    s: &Placement,
    samples: usize,
    seed: u64,
) -> Result<CostEstimate> {
    if s.k() != bundle.k {
        return Err(Error::KMismatch {
            expected: bundle.k,
            found: s.k(),
        });
    }
    mc_cost_with(&bundle.metric, &bundle.demand, s, samples, seed)
}
