//! Randomized placements: RP, VRRP and RRP.
//!
//! Unit `i` of a placement draws from its own stream `(seed, domain, i)`,
//! so the first `j` units are unchanged when `k` grows.

use crate::bundle::InstanceBundle;
use crate::demand::{DemandDistribution, Sampler};
use crate::error::{Error, Result};
use crate::eval::realization_distribution;
use crate::matching::project_to_allowable;
use crate::placement::Placement;
use crate::rng::{domain, stream};

/// Slack added before flooring `P(x) * k`, so that products such as
/// `0.29 * 100 = 28.999...` floor to the intended integer.
pub const FLOOR_SLACK: f64 = 1e-9;

/// `k` i.i.d. draws from the demand distribution.
pub fn rp_place(demand: &DemandDistribution, k: usize, seed: u64) -> Placement {
    assert!(k >= 1, "k must be at least 1");
    let sampler = demand.sampler();
    let mut counts = vec![0u32; demand.len()];
    for i in 0..k as u64 {
        let mut rng = stream(seed, domain::PLACEMENT_UNIT, i);
        counts[sampler.sample(&mut rng)] += 1;
    }
    Placement::from_counts(counts).expect("k >= 1")
}

/// Deterministic floors `floor(P(x) k)` and the residual weights
/// `P(x) - floor(P(x) k) / k` left for the remaining units.
#[derive(Debug, Clone, PartialEq)]
pub struct VrrpSplit {
    pub floors: Vec<u32>,
    pub residual_units: usize,
    pub residual_weights: Vec<f64>,
}

pub fn vrrp_split(demand: &DemandDistribution, k: usize) -> VrrpSplit {
    let kf = k as f64;
    let floors: Vec<u32> = demand
        .probs()
        .iter()
        .map(|&p| (p * kf + FLOOR_SLACK).floor() as u32)
        .collect();
    let placed: usize = floors.iter().map(|&f| f as usize).sum();
    let residual_units = k.saturating_sub(placed);
    let mut residual_weights: Vec<f64> = demand
        .probs()
        .iter()
        .zip(&floors)
        .map(|(&p, &f)| (p - f as f64 / kf).max(0.0))
        .collect();
    if residual_units > 0 && residual_weights.iter().all(|&w| w <= 0.0) {
        residual_weights = demand.probs().to_vec();
    }
    VrrpSplit {
        floors,
        residual_units,
        residual_weights,
    }
}

/// Variance-reduced random placement.
pub fn vrrp_place(demand: &DemandDistribution, k: usize, seed: u64) -> Placement {
    assert!(k >= 1, "k must be at least 1");
    let split = vrrp_split(demand, k);
    let mut counts = split.floors;
    if split.residual_units > 0 {
        let sampler = Sampler::new(&split.residual_weights);
        for j in 0..split.residual_units as u64 {
            let mut rng = stream(seed, domain::RESIDUAL_UNIT, j);
            counts[sampler.sample(&mut rng)] += 1;
        }
    }
    Placement::from_counts(counts).expect("k >= 1")
}

/// Random placement followed by projection onto the allowable points.
///
/// Without an allowable set the bundle's full point set is used.
pub fn rrp_place(bundle: &InstanceBundle, seed: u64) -> Result<Placement> {
    let s = rp_place(&bundle.demand, bundle.k, seed);
    match &bundle.allowable {
        None => Ok(s),
        Some(a) if a.is_empty() => Err(Error::EmptyAllowableSet),
        Some(a) => project_to_allowable(&bundle.metric, &s, a),
    }
}

/// Exact output distribution of [`rp_place`].
pub fn rp_distribution(demand: &DemandDistribution, k: usize) -> Result<Vec<(Placement, f64)>> {
    realization_distribution(demand, k)
}

/// Exact output distribution of [`vrrp_place`].
pub fn vrrp_distribution(demand: &DemandDistribution, k: usize) -> Result<Vec<(Placement, f64)>> {
    let split = vrrp_split(demand, k);
    let floors = Placement::from_counts(split.floors.clone());
    if split.residual_units == 0 {
        return Ok(vec![(floors?, 1.0)]);
    }
    let total: f64 = split.residual_weights.iter().sum();
    let normalized =
        DemandDistribution::new(split.residual_weights.iter().map(|w| w / total).collect())?;
    let residual = realization_distribution(&normalized, split.residual_units)?;
    Ok(residual
        .into_iter()
        .map(|(r, w)| {
            let counts = r
                .counts()
                .iter()
                .zip(&split.floors)
                .map(|(a, b)| a + b)
                .collect();
            (Placement::from_counts(counts).expect("k >= 1"), w)
        })
        .collect())
}

/// Exact output distribution of [`rrp_place`].
pub fn rrp_distribution(bundle: &InstanceBundle) -> Result<Vec<(Placement, f64)>> {
    let dist = rp_distribution(&bundle.demand, bundle.k)?;
    match &bundle.allowable {
        None => Ok(dist),
        Some(a) => dist
            .into_iter()
            .map(|(s, w)| Ok((project_to_allowable(&bundle.metric, &s, a)?, w)))
            .collect(),
    }
}
