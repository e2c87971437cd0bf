//! Uniform capacitated k-median: choose integer counts `Q(x)` with
//! `sum Q = k` minimizing the transport cost from supplies `Q(x) / k` to the
//! demand distribution.
//!
//! Solved by branch and bound over `Q`. The relaxation at a node lets each
//! `Q(x)` range continuously over `[lb(x), ub(x)]` and is a transportation
//! problem, solved by min-cost flow in count units:
//!
//! ```text
//! source -> y        cap k P(y)
//! y -> x             cost d(y, x)
//! x -> sink          cap lb(x)           cost 0
//! x -> sink          cap ub(x) - lb(x)   cost M
//! ```
//!
//! With `M` above the largest distance every lower-bound arc saturates in an
//! optimal flow, so the penalty is a constant and the transport part is the
//! relaxation value.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::matching::flow::FlowNetwork;
use crate::matching::{wasserstein, TransportPlan};
use crate::metric::MetricSpace;
use crate::placement::Placement;

/// Relaxed counts within this of an integer are treated as integral.
pub const INTEGRALITY_TOL: f64 = 1e-7;

/// Nodes whose bound is within this (relative) of the incumbent are pruned.
const PRUNE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UckmStatus {
    Optimal,
    GapLimit,
    TimeLimit,
}

/// One incumbent improvement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UckmLogEntry {
    pub iteration: u64,
    pub lower_bound: f64,
    pub incumbent: f64,
    pub gap: f64,
}

impl std::fmt::Display for UckmLogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "iter {:>8}  bound {:.9}  incumbent {:.9}  gap {:.3e}",
            self.iteration, self.lower_bound, self.incumbent, self.gap
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UckmSolution {
    pub placement: Placement,
    pub transport: TransportPlan,
    pub objective: f64,
    pub lower_bound: f64,
    /// `(objective - lower_bound) / objective`, 0 when the objective is 0.
    pub optimality_gap: f64,
    pub status: UckmStatus,
    pub nodes: u64,
    pub log: Vec<UckmLogEntry>,
}

fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    if incumbent <= 0.0 {
        0.0
    } else {
        ((incumbent - bound) / incumbent).max(0.0)
    }
}

struct Relaxation<'a> {
    space: &'a MetricSpace,
    /// Support points of the demand and `k P(y)`.
    demand: Vec<(usize, f64)>,
    k: usize,
    penalty: f64,
    eps: f64,
}

impl Relaxation<'_> {
    /// Relaxed counts and the relaxation value (divided by `k`), or `None`
    /// when the bounds admit no point with `sum Q = k`.
    fn solve(&self, lb: &[u32], ub: &[u32]) -> Option<(Vec<f64>, f64)> {
        let n = self.space.len();
        let lb_total: u64 = lb.iter().map(|&v| v as u64).sum();
        let ub_total: u64 = ub.iter().map(|&v| v as u64).sum();
        let k = self.k as u64;
        if lb_total > k || ub_total < k {
            return None;
        }
        let m = self.demand.len();
        let source = 0;
        let sink = 1 + m + n;
        let mut g = FlowNetwork::new(sink + 1, self.eps);
        for (j, &(_, mass)) in self.demand.iter().enumerate() {
            g.add_arc(source, 1 + j, mass, 0.0);
        }
        let mut transport_arcs = Vec::with_capacity(m * n);
        for (j, &(y, mass)) in self.demand.iter().enumerate() {
            for x in 0..n {
                if ub[x] > 0 {
                    let id = g.add_arc(1 + j, 1 + m + x, mass, self.space.d(y, x));
                    transport_arcs.push((id, x));
                }
            }
        }
        for x in 0..n {
            if lb[x] > 0 {
                g.add_arc(1 + m + x, sink, lb[x] as f64, 0.0);
            }
            if ub[x] > lb[x] {
                g.add_arc(1 + m + x, sink, (ub[x] - lb[x]) as f64, self.penalty);
            }
        }
        let out = g.min_cost_flow(source, sink, self.k as f64);
        if (out.flow - self.k as f64).abs() > 1e-6 * self.k as f64 {
            return None;
        }
        let mut q = vec![0.0; n];
        let mut cost = 0.0;
        for (id, x) in transport_arcs {
            let f = g.flow(id);
            q[x] += f;
            cost += f * g.cost(id);
        }
        Some((q, cost / self.k as f64))
    }
}

/// Imbalance bound: any mass moved into or out of `x` travels at least the
/// distance from `x` to its nearest other point, and every unit of flow has
/// two endpoints, so the transport cost is at least
/// `sum_x |Q(x) - k P(x)| nn(x) / 2`. Minimized over integer `Q` in the box
/// with `sum Q = k` greedily (the objective is separable and convex).
struct ImbalanceBound {
    target: Vec<f64>,
    weight: Vec<f64>,
    k: usize,
}

impl ImbalanceBound {
    fn new(space: &MetricSpace, demand: &DemandDistribution, k: usize) -> Self {
        let n = space.len();
        let weight = (0..n)
            .map(|x| {
                let nn = (0..n)
                    .filter(|&y| y != x)
                    .map(|y| space.d(x, y))
                    .fold(f64::INFINITY, f64::min);
                if nn.is_finite() {
                    nn / 2.0
                } else {
                    0.0
                }
            })
            .collect();
        ImbalanceBound {
            target: demand.probs().iter().map(|p| p * k as f64).collect(),
            weight,
            k,
        }
    }

    fn term(&self, x: usize, q: u32) -> f64 {
        self.weight[x] * (q as f64 - self.target[x]).abs()
    }

    /// Value divided by `k`.
    fn solve(&self, lb: &[u32], ub: &[u32]) -> f64 {
        let n = self.target.len();
        let mut q: Vec<u32> = (0..n)
            .map(|x| (self.target[x].round() as u32).clamp(lb[x], ub[x]))
            .collect();
        let mut total: i64 = q.iter().map(|&v| v as i64).sum();
        let k = self.k as i64;
        while total != k {
            let up = total < k;
            let mut best: Option<(f64, usize)> = None;
            for x in 0..n {
                let next = if up {
                    if q[x] >= ub[x] {
                        continue;
                    }
                    q[x] + 1
                } else {
                    if q[x] <= lb[x] {
                        continue;
                    }
                    q[x] - 1
                };
                let delta = self.term(x, next) - self.term(x, q[x]);
                if best.is_none_or(|(d, _)| delta < d) {
                    best = Some((delta, x));
                }
            }
            let Some((_, x)) = best else {
                return f64::INFINITY;
            };
            if up {
                q[x] += 1;
                total += 1;
            } else {
                q[x] -= 1;
                total -= 1;
            }
        }
        (0..n).map(|x| self.term(x, q[x])).sum::<f64>() / self.k as f64
    }
}

/// Rounds relaxed counts to integers inside `[lb, ub]` summing to `k`,
/// giving the leftover units to the largest fractional parts.
fn round_counts(q: &[f64], lb: &[u32], ub: &[u32], k: usize) -> Option<Vec<u32>> {
    let mut counts: Vec<u32> = q
        .iter()
        .zip(lb.iter().zip(ub))
        .map(|(&v, (&l, &u))| ((v + INTEGRALITY_TOL).floor() as u32).clamp(l, u))
        .collect();
    let placed: usize = counts.iter().map(|&c| c as usize).sum();
    if placed > k {
        return None;
    }
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = q[a] - counts[a] as f64;
        let fb = q[b] - counts[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut left = k - placed;
    while left > 0 {
        let before = left;
        for &x in &order {
            if left == 0 {
                break;
            }
            if counts[x] < ub[x] {
                counts[x] += 1;
                left -= 1;
            }
        }
        if left == before {
            return None;
        }
    }
    Some(counts)
}

/// The fractional coordinate closest to one half, lowest index on ties.
fn branching_variable(q: &[f64]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (x, &v) in q.iter().enumerate() {
        let frac = v - v.floor();
        let score = frac.min(1.0 - frac);
        if score <= INTEGRALITY_TOL {
            continue;
        }
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, x));
        }
    }
    best.map(|(_, x)| x)
}

/// Improves `counts` by moving single units while the transport cost drops
/// by more than `PRUNE_TOL`, taking the best move each round (lowest
/// `(from, to)` on ties).
fn polish(
    space: &MetricSpace,
    demand: &DemandDistribution,
    mut s: Placement,
    mut plan: TransportPlan,
    deadline: Option<Instant>,
) -> Result<(Placement, TransportPlan)> {
    let n = space.len();
    loop {
        if deadline.is_some_and(|t| Instant::now() >= t) {
            return Ok((s, plan));
        }
        let mut best: Option<(Placement, TransportPlan)> = None;
        let mut best_cost = plan.total_cost - PRUNE_TOL * (1.0 + plan.total_cost);
        for from in 0..n {
            if s.count(from) == 0 {
                continue;
            }
            for to in 0..n {
                if to == from {
                    continue;
                }
                let mut counts = s.counts().to_vec();
                counts[from] -= 1;
                counts[to] += 1;
                let cand = Placement::from_counts(counts)?;
                let p = wasserstein(space, &cand.point_mass(), demand)?;
                if p.total_cost < best_cost {
                    best_cost = p.total_cost;
                    best = Some((cand, p));
                }
            }
        }
        match best {
            Some((c, p)) => {
                s = c;
                plan = p;
            }
            None => return Ok((s, plan)),
        }
    }
}

struct Node {
    bound: f64,
    seq: u64,
    lb: Vec<u32>,
    ub: Vec<u32>,
    q: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl Ord for Node {
    // Min-heap on bound, then creation order.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact (for `gap_tol = 0` and no time limit) uniform capacitated k-median.
///
/// Stops early with status `GapLimit` once the relative gap is at most
/// `gap_tol`, or `TimeLimit` when `time_limit` elapses; the best placement
/// found so far is returned together with the proven lower bound.
pub fn uckm_solve(
    space: &MetricSpace,
    demand: &DemandDistribution,
    k: usize,
    gap_tol: f64,
    time_limit: Option<Duration>,
) -> Result<UckmSolution> {
    if k == 0 {
        return Err(Error::KMismatch {
            expected: 1,
            found: 0,
        });
    }
    if !(gap_tol >= 0.0) {
        return Err(Error::OutOfRange(format!(
            "gap tolerance {gap_tol} must be nonnegative"
        )));
    }
    if demand.len() != space.len() {
        return Err(Error::DimensionMismatch {
            what: "demand",
            expected: space.len(),
            found: demand.len(),
        });
    }
    let start = Instant::now();
    let n = space.len();
    let kf = k as f64;
    let relax = Relaxation {
        space,
        demand: demand.support().map(|y| (y, demand.p(y) * kf)).collect(),
        k,
        penalty: 2.0 * space.max_distance() + 1.0,
        eps: 1e-12 * kf,
    };
    let imbalance = ImbalanceBound::new(space, demand, k);
    let deadline = time_limit.map(|t| start + t);
    let evaluate = |counts: Vec<u32>| -> Result<(Placement, TransportPlan)> {
        let s = Placement::from_counts(counts)?;
        let plan = wasserstein(space, &s.point_mass(), demand)?;
        Ok((s, plan))
    };
    let improve = |(s, plan): (Placement, TransportPlan)| polish(space, demand, s, plan, deadline);

    let lb0 = vec![0u32; n];
    let ub0 = vec![k as u32; n];
    let (q0, bound0) = relax
        .solve(&lb0, &ub0)
        .ok_or_else(|| Error::Infeasible("root relaxation has no feasible flow".into()))?;
    let bound0 = bound0.max(imbalance.solve(&lb0, &ub0));
    let counts0 = round_counts(&q0, &lb0, &ub0, k)
        .ok_or_else(|| Error::Infeasible("rounding failed".into()))?;
    let (mut best_s, mut best_plan) = improve(evaluate(counts0)?)?;
    let mut incumbent = best_plan.total_cost;

    let mut log = Vec::new();
    let mut iteration = 0u64;
    let record = |iteration: u64, bound: f64, incumbent: f64, log: &mut Vec<UckmLogEntry>| {
        let entry = UckmLogEntry {
            iteration,
            lower_bound: bound,
            incumbent,
            gap: relative_gap(incumbent, bound),
        };
        log::info!("uckm: {entry}");
        log.push(entry);
    };
    record(0, bound0.min(incumbent), incumbent, &mut log);

    let prunes = |bound: f64, incumbent: f64| bound >= incumbent - PRUNE_TOL * (1.0 + incumbent);
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: bound0,
        seq,
        lb: lb0,
        ub: ub0,
        q: q0,
    });
    let mut status = UckmStatus::Optimal;

    while let Some(node) = heap.pop() {
        if prunes(node.bound, incumbent) {
            heap.clear();
            break;
        }
        if gap_tol > 0.0 && relative_gap(incumbent, node.bound) <= gap_tol {
            heap.push(node);
            status = UckmStatus::GapLimit;
            break;
        }
        if time_limit.is_some_and(|t| start.elapsed() >= t) {
            heap.push(node);
            status = UckmStatus::TimeLimit;
            break;
        }
        iteration += 1;
        let Some(x) = branching_variable(&node.q) else {
            // Integral relaxation: it is this node's optimum.
            let counts: Vec<u32> = node.q.iter().map(|v| v.round() as u32).collect();
            let (s, plan) = evaluate(counts)?;
            if plan.total_cost < incumbent {
                incumbent = plan.total_cost;
                best_s = s;
                best_plan = plan;
                let open = heap.peek().map_or(incumbent, |n| n.bound.min(incumbent));
                record(iteration, open, incumbent, &mut log);
            }
            continue;
        };
        let v = node.q[x].floor() as u32;
        let mut children = Vec::with_capacity(2);
        let mut down_ub = node.ub.clone();
        down_ub[x] = v;
        children.push((node.lb.clone(), down_ub));
        let mut up_lb = node.lb;
        up_lb[x] = v + 1;
        children.push((up_lb, node.ub));
        for (lb, ub) in children {
            let Some((q, bound)) = relax.solve(&lb, &ub) else {
                continue;
            };
            let bound = bound.max(node.bound).max(imbalance.solve(&lb, &ub));
            if prunes(bound, incumbent) {
                continue;
            }
            if let Some(counts) = round_counts(&q, &lb, &ub, k) {
                let (s, plan) = evaluate(counts)?;
                if plan.total_cost < incumbent {
                    let (s, plan) = improve((s, plan))?;
                    incumbent = plan.total_cost;
                    best_s = s;
                    best_plan = plan;
                    let open = heap
                        .peek()
                        .map_or(bound, |n| n.bound.min(bound))
                        .min(incumbent);
                    record(iteration, open, incumbent, &mut log);
                }
            }
            if !prunes(bound, incumbent) {
                seq += 1;
                heap.push(Node {
                    bound,
                    seq,
                    lb,
                    ub,
                    q,
                });
            }
        }
    }

    let lower_bound = match status {
        UckmStatus::Optimal => incumbent,
        _ => heap.peek().map_or(incumbent, |n| n.bound.min(incumbent)),
    };
    Ok(UckmSolution {
        placement: best_s,
        objective: best_plan.total_cost,
        transport: best_plan,
        lower_bound,
        optimality_gap: relative_gap(incumbent, lower_bound),
        status,
        nodes: iteration,
        log,
    })
}

/// Minimum transport cost over every integer `Q` with `sum Q = k`.
pub fn uckm_exhaustive(
    space: &MetricSpace,
    demand: &DemandDistribution,
    k: usize,
) -> Result<(Placement, f64)> {
    let mut best: Option<(Placement, f64)> = None;
    for s in crate::placement::all_placements(space.len(), k) {
        let c = wasserstein(space, &s.point_mass(), demand)?.total_cost;
        if best.as_ref().is_none_or(|(_, b)| c < *b) {
            best = Some((s, c));
        }
    }
    best.ok_or_else(|| Error::Infeasible("no placements".into()))
}
