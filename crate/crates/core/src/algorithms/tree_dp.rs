//! Exact placement on tree metrics by dynamic programming.
//!
//! `V(u, t)` is the least expected cost contributed by edges inside the
//! subtree of `u` when `t` units are placed in it. Leaves have `V = 0`; an
//! internal node splits `t` into `t_l` units below its left child, `t_r`
//! below its right child, and keeps the rest on itself:
//!
//! ```text
//! V(u, t) = min_{t_l + t_r <= t}  V(l, t_l) + B(t_l, p_l) c(u, l)
//!                               + V(r, t_r) + B(t_r, p_r) c(u, r)
//! ```
//!
//! `V(root, k)` is the optimal expected cost. Runs in `O(n k^3)`.

use crate::error::{Error, Result};
use crate::eval::binom_abs_dev_table;
use crate::placement::Placement;
use crate::tree::TreeMetric;

/// Filled DP table with split backpointers.
#[derive(Debug, Clone, PartialEq)]
pub struct DpTable {
    k: usize,
    values: Vec<Vec<f64>>,
    splits: Vec<Vec<(u32, u32)>>,
}

impl DpTable {
    pub fn k(&self) -> usize {
        self.k
    }

    /// `V(u, t)`.
    pub fn value(&self, u: usize, t: usize) -> f64 {
        self.values[u][t]
    }

    /// `(t_l, t_r)` chosen for `V(u, t)`; `(0, 0)` at leaves.
    pub fn split(&self, u: usize, t: usize) -> (usize, usize) {
        let (a, b) = self.splits[u][t];
        (a as usize, b as usize)
    }
}

/// Edge term `B(t, p_v) c(parent(v), v)` plus `V(v, t)` for all `t`.
fn child_term(tree: &TreeMetric, values: &[Vec<f64>], v: usize, k: usize) -> Result<Vec<f64>> {
    let c = tree.edge_cost(v);
    let b = binom_abs_dev_table(tree.mass(v).clamp(0.0, 1.0), k)?;
    Ok(values[v]
        .iter()
        .zip(b)
        .map(|(&val, bt)| val + bt * c)
        .collect())
}

/// Optimal placement of `k` units on a binary tree.
///
/// Returns the placement over the tree's nodes (use
/// [`TreeMetric::to_original`] to fold introduced nodes back), `V(root, k)`
/// and the table. Equal-value splits resolve to the smallest `t_l`, then the
/// smallest `t_r`.
pub fn tree_dp_solve(tree: &TreeMetric, k: usize) -> Result<(Placement, f64, DpTable)> {
    if k == 0 {
        return Err(Error::KMismatch {
            expected: 1,
            found: 0,
        });
    }
    let n = tree.len();
    let mut values = vec![Vec::new(); n];
    let mut splits = vec![Vec::new(); n];
    for &u in tree.post_order() {
        match tree.children(u) {
            None => {
                values[u] = vec![0.0; k + 1];
                splits[u] = vec![(0, 0); k + 1];
            }
            Some((l, r)) => {
                let gl = child_term(tree, &values, l, k)?;
                let gr = child_term(tree, &values, r, k)?;
                let mut vu = vec![f64::INFINITY; k + 1];
                let mut su = vec![(0u32, 0u32); k + 1];
                for t in 0..=k {
                    for tl in 0..=t {
                        for tr in 0..=(t - tl) {
                            let v = gl[tl] + gr[tr];
                            if v < vu[t] {
                                vu[t] = v;
                                su[t] = (tl as u32, tr as u32);
                            }
                        }
                    }
                }
                values[u] = vu;
                splits[u] = su;
            }
        }
    }
    let table = DpTable { k, values, splits };

    let mut counts = vec![0u32; n];
    let mut stack = vec![(tree.root(), k)];
    while let Some((u, t)) = stack.pop() {
        match tree.children(u) {
            None => counts[u] += t as u32,
            Some((l, r)) => {
                let (tl, tr) = table.split(u, t);
                counts[u] += (t - tl - tr) as u32;
                stack.push((l, tl));
                stack.push((r, tr));
            }
        }
    }
    let cost = table.value(tree.root(), k);
    Ok((Placement::from_counts(counts)?, cost, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::tree_exact_cost;
    use crate::placement::all_placements;
    use crate::tree::GeneralTree;

    #[test]
    fn two_leaves_one_each() {
        let t = TreeMetric::from_binary(&GeneralTree {
            parent: vec![-1, 0, 0],
            edge_cost: vec![0.0, 1.0, 1.0],
            probs: vec![0.0, 0.5, 0.5],
        })
        .unwrap();
        let (s, cost, table) = tree_dp_solve(&t, 2).unwrap();
        assert_eq!(s.counts(), &[0, 1, 1]);
        assert!((cost - 1.0).abs() < 1e-15);
        let brute = all_placements(3, 2)
            .map(|p| tree_exact_cost(&t, &p, 2).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!((brute - cost).abs() < 1e-15);
        for t_ in 0..=2 {
            assert_eq!(table.value(1, t_), 0.0);
            assert_eq!(table.value(2, t_), 0.0);
        }
    }

    #[test]
    fn single_node() {
        let t = TreeMetric::from_binary(&GeneralTree {
            parent: vec![-1],
            edge_cost: vec![0.0],
            probs: vec![1.0],
        })
        .unwrap();
        for k in 1..5 {
            let (s, cost, _) = tree_dp_solve(&t, k).unwrap();
            assert_eq!(cost, 0.0);
            assert_eq!(s.counts(), &[k as u32]);
        }
    }

    #[test]
    fn table_entries_satisfy_recurrence() {
        let t = crate::tree::binarize_tree(&GeneralTree {
            parent: vec![-1, 0, 0, 0, 1, 1],
            edge_cost: vec![0.0, 2.0, 1.0, 0.5, 1.5, 0.25],
            probs: vec![0.1, 0.2, 0.1, 0.3, 0.2, 0.1],
        })
        .unwrap();
        let k = 4;
        let (_, _, table) = tree_dp_solve(&t, k).unwrap();
        for u in 0..t.len() {
            let Some((l, r)) = t.children(u) else {
                continue;
            };
            let bl = binom_abs_dev_table(t.mass(l).min(1.0), k).unwrap();
            let br = binom_abs_dev_table(t.mass(r).min(1.0), k).unwrap();
            for tt in 0..=k {
                let mut best = f64::INFINITY;
                for a in 0..=tt {
                    for b in 0..=(tt - a) {
                        best = best.min(
                            table.value(l, a)
                                + bl[a] * t.edge_cost(l)
                                + table.value(r, b)
                                + br[b] * t.edge_cost(r),
                        );
                    }
                }
                assert_eq!(table.value(u, tt), best);
            }
        }
    }
}
