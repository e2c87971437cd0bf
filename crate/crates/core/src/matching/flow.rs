//! Min-cost flow by successive shortest augmenting paths.
//!
//! Capacities and costs are `f64`. Dijkstra runs on reduced costs
//! `c(u,v) + pi(u) - pi(v)`, which stay nonnegative after every potential
//! update up to rounding; small negative values are clamped to zero.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy)]
struct Arc {
    to: usize,
    residual: f64,
    cost: f64,
}

/// A directed network whose arcs all have nonnegative cost.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    arcs: Vec<Arc>,
    capacity: Vec<f64>,
    /// Residual amounts at or below this are treated as saturated.
    eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOutcome {
    pub flow: f64,
    pub augmentations: usize,
}

#[derive(Copy, Clone, PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FlowNetwork {
    pub fn new(nodes: usize, eps: f64) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); nodes],
            arcs: Vec::new(),
            capacity: Vec::new(),
            eps,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds an arc and returns its id. `cost` must be nonnegative.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
        debug_assert!(cost >= 0.0, "negative arc cost {cost}");
        let id = self.arcs.len();
        self.arcs.push(Arc {
            to,
            residual: cap,
            cost,
        });
        self.arcs.push(Arc {
            to: from,
            residual: 0.0,
            cost: -cost,
        });
        self.capacity.push(cap);
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently on arc `id`.
    pub fn flow(&self, id: usize) -> f64 {
        self.arcs[id + 1].residual
    }

    pub fn cost(&self, id: usize) -> f64 {
        self.arcs[id].cost
    }

    pub fn arc_ids(&self) -> impl Iterator<Item = usize> {
        (0..self.arcs.len()).step_by(2)
    }

    pub fn endpoints(&self, id: usize) -> (usize, usize) {
        (self.arcs[id + 1].to, self.arcs[id].to)
    }

    /// Sends up to `limit` units from `source` to `sink` at minimum cost.
    pub fn min_cost_flow(&mut self, source: usize, sink: usize, limit: f64) -> FlowOutcome {
        let n = self.adj.len();
        let mut potential = vec![0.0f64; n];
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        let mut flow = 0.0;
        let mut augmentations = 0;

        while limit - flow > self.eps {
            dist.fill(f64::INFINITY);
            via.fill(usize::MAX);
            done.fill(false);
            dist[source] = 0.0;
            heap.push(HeapItem {
                dist: 0.0,
                node: source,
            });
            while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
                if done[u] {
                    continue;
                }
                done[u] = true;
                for &a in &self.adj[u] {
                    let arc = self.arcs[a];
                    if arc.residual <= self.eps || done[arc.to] {
                        continue;
                    }
                    let reduced = (arc.cost + potential[u] - potential[arc.to]).max(0.0);
                    let nd = d + reduced;
                    if nd < dist[arc.to] {
                        dist[arc.to] = nd;
                        via[arc.to] = a;
                        heap.push(HeapItem {
                            dist: nd,
                            node: arc.to,
                        });
                    }
                }
            }
            if !dist[sink].is_finite() {
                break;
            }
            let cap_dist = dist[sink];
            for v in 0..n {
                potential[v] += dist[v].min(cap_dist);
            }

            let mut push = limit - flow;
            let mut v = sink;
            while v != source {
                let a = via[v];
                push = push.min(self.arcs[a].residual);
                v = self.arcs[a ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let a = via[v];
                self.arcs[a].residual -= push;
                if self.arcs[a].residual <= self.eps {
                    self.arcs[a].residual = 0.0;
                }
                self.arcs[a ^ 1].residual += push;
                v = self.arcs[a ^ 1].to;
            }
            flow += push;
            augmentations += 1;
        }
        FlowOutcome {
            flow,
            augmentations,
        }
    }

    /// Cost of the current flow, `sum flow * cost` over forward arcs.
    pub fn total_cost(&self) -> f64 {
        self.arc_ids().map(|id| self.flow(id) * self.cost(id)).sum()
    }

    pub fn capacity(&self, id: usize) -> f64 {
        self.capacity[id / 2]
    }
}
