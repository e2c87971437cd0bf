//! Matching distance between k-multisets and Wasserstein distance between
//! discrete distributions.
//!
//! Both are solved as transportation problems on the aggregated support:
//! one node per distinct point, not one per unit. Mass shared by both sides
//! at the same point is kept in place first; in a metric that never costs
//! optimality.

pub mod flow;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PointId};
use crate::placement::Placement;
use flow::FlowNetwork;

/// Mass below this is treated as zero when solving transport problems.
pub const MASS_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub source: PointId,
    pub target: PointId,
    pub multiplicity: u32,
    pub unit_distance: f64,
}

/// An optimal perfect matching between two k-multisets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingPlan {
    pub pairs: Vec<MatchedPair>,
    pub total_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportEntry {
    pub source: PointId,
    pub target: PointId,
    pub mass: f64,
    pub unit_distance: f64,
}

/// An optimal transport plan between two distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub entries: Vec<TransportEntry>,
    pub total_cost: f64,
}

impl TransportPlan {
    /// Outgoing mass per source point.
    pub fn row_sums(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for e in &self.entries {
            out[e.source.0] += e.mass;
        }
        out
    }

    /// Incoming mass per target point.
    pub fn column_sums(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for e in &self.entries {
            out[e.target.0] += e.mass;
        }
        out
    }
}

/// Solves the transportation problem between two nonnegative vectors of
/// equal total; returns `(source, target, amount)` triples, including the
/// in-place amounts.
pub(crate) fn solve_transport(
    space: &MetricSpace,
    supply: &[f64],
    demand: &[f64],
    eps: f64,
) -> Vec<(usize, usize, f64)> {
    let n = supply.len();
    let mut out = Vec::new();
    let mut src = Vec::new();
    let mut dst = Vec::new();
    for x in 0..n {
        let common = supply[x].min(demand[x]);
        if common > eps {
            out.push((x, x, common));
        }
        let s = supply[x] - common;
        let d = demand[x] - common;
        if s > eps {
            src.push((x, s));
        }
        if d > eps {
            dst.push((x, d));
        }
    }
    if src.is_empty() || dst.is_empty() {
        return out;
    }
    let source = 0;
    let sink = 1 + src.len() + dst.len();
    let mut g = FlowNetwork::new(sink + 1, eps);
    let total: f64 = src.iter().map(|&(_, s)| s).sum();
    for (i, &(_, s)) in src.iter().enumerate() {
        g.add_arc(source, 1 + i, s, 0.0);
    }
    let mut pair_arcs = Vec::with_capacity(src.len() * dst.len());
    for (i, &(x, s)) in src.iter().enumerate() {
        for (j, &(y, d)) in dst.iter().enumerate() {
            let id = g.add_arc(1 + i, 1 + src.len() + j, s.min(d), space.d(x, y));
            pair_arcs.push((id, x, y));
        }
    }
    for (j, &(_, d)) in dst.iter().enumerate() {
        g.add_arc(1 + src.len() + j, sink, d, 0.0);
    }
    g.min_cost_flow(source, sink, total);
    for (id, x, y) in pair_arcs {
        let f = g.flow(id);
        if f > eps {
            out.push((x, y, f));
        }
    }
    out.sort_by_key(|a| (a.0, a.1));
    out
}

fn check_same_space(space: &MetricSpace, what: &'static str, len: usize) -> Result<()> {
    if len != space.len() {
        return Err(Error::DimensionMismatch {
            what,
            expected: space.len(),
            found: len,
        });
    }
    Ok(())
}

/// Minimum-cost perfect matching between two k-multisets; `total_cost` is
/// their matching distance.
pub fn matching_cost(space: &MetricSpace, u: &Placement, v: &Placement) -> Result<MatchingPlan> {
    if u.k() != v.k() {
        return Err(Error::SizeMismatch(u.k(), v.k()));
    }
    check_same_space(space, "placement u", u.n())?;
    check_same_space(space, "placement v", v.n())?;
    let supply: Vec<f64> = u.counts().iter().map(|&c| c as f64).collect();
    let demand: Vec<f64> = v.counts().iter().map(|&c| c as f64).collect();
    let raw = solve_transport(space, &supply, &demand, 0.5);
    let pairs: Vec<MatchedPair> = raw
        .into_iter()
        .map(|(x, y, f)| MatchedPair {
            source: PointId(x),
            target: PointId(y),
            multiplicity: f.round() as u32,
            unit_distance: space.d(x, y),
        })
        .collect();
    let total_cost = pairs
        .iter()
        .map(|p| p.multiplicity as f64 * p.unit_distance)
        .sum();
    Ok(MatchingPlan { pairs, total_cost })
}

/// Matching distance only.
pub fn matching_distance(space: &MetricSpace, u: &Placement, v: &Placement) -> Result<f64> {
    matching_cost(space, u, v).map(|p| p.total_cost)
}

/// Minimum-cost transport plan between two distributions.
pub fn wasserstein(
    space: &MetricSpace,
    mu: &DemandDistribution,
    nu: &DemandDistribution,
) -> Result<TransportPlan> {
    check_same_space(space, "distribution mu", mu.len())?;
    check_same_space(space, "distribution nu", nu.len())?;
    let raw = solve_transport(space, mu.probs(), nu.probs(), MASS_EPS);
    let entries: Vec<TransportEntry> = raw
        .into_iter()
        .map(|(x, y, m)| TransportEntry {
            source: PointId(x),
            target: PointId(y),
            mass: m,
            unit_distance: space.d(x, y),
        })
        .collect();
    let total_cost = entries.iter().map(|e| e.mass * e.unit_distance).sum();
    Ok(TransportPlan {
        entries,
        total_cost,
    })
}

/// Distribution with mass `count / k` at each point of `u`.
pub fn point_mass(u: &Placement) -> DemandDistribution {
    u.point_mass()
}

/// Nearest point of `allowable` to `x`, lowest id on ties.
pub fn nearest_allowable(space: &MetricSpace, x: usize, allowable: &[usize]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &a in allowable {
        let d = space.d(x, a);
        match best {
            Some((bd, ba)) if d > bd || (d == bd && a > ba) => {}
            _ => best = Some((d, a)),
        }
    }
    best.map(|(_, a)| a)
}

/// Moves every unit of `s` to its nearest allowable point.
///
/// The matching distance to `s` separates over units, so the result is a
/// closest k-multiset drawn from `allowable`.
pub fn project_to_allowable(
    space: &MetricSpace,
    s: &Placement,
    allowable: &[usize],
) -> Result<Placement> {
    if allowable.is_empty() {
        return Err(Error::EmptyAllowableSet);
    }
    check_same_space(space, "placement", s.n())?;
    if let Some(&bad) = allowable.iter().find(|&&a| a >= space.len()) {
        return Err(Error::OutOfRange(format!(
            "allowable point {bad} >= n = {}",
            space.len()
        )));
    }
    let mut counts = vec![0u32; space.len()];
    for (x, c) in s.support() {
        let a = nearest_allowable(space, x, allowable).expect("nonempty");
        counts[a] += c;
    }
    Placement::from_counts(counts)
}

/// Largest k accepted by [`brute_force_matching`].
pub const BRUTE_FORCE_MAX_K: usize = 8;

/// Minimum over all `k!` bijections between the expanded multisets.
pub fn brute_force_matching(space: &MetricSpace, u: &Placement, v: &Placement) -> Result<f64> {
    if u.k() != v.k() {
        return Err(Error::SizeMismatch(u.k(), v.k()));
    }
    if u.k() > BRUTE_FORCE_MAX_K {
        return Err(Error::TooLarge(format!(
            "k = {} exceeds {BRUTE_FORCE_MAX_K}",
            u.k()
        )));
    }
    let a = u.expand();
    let b = v.expand();
    let best = (0..b.len())
        .permutations(b.len())
        .map(|perm| {
            a.iter()
                .zip(perm)
                .map(|(&x, j)| space.d(x, b[j]))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}
