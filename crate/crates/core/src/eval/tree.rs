//! Closed-form evaluation on tree metrics.
//!
//! On a tree some optimal matching never sends units across an edge in both
//! directions, so each edge carries exactly the discrepancy between the two
//! multisets inside the subtree below it. With random demand that
//! discrepancy is `|t - Binomial(k, p_e)|`.

use super::binomial::binom_abs_dev;
use crate::error::{Error, Result};
use crate::placement::Placement;
use crate::tree::TreeMetric;

/// Accepts placements over either the binarized nodes or the original ones.
fn on_tree(tree: &TreeMetric, s: &Placement) -> Result<Placement> {
    if s.n() == tree.len() {
        Ok(s.clone())
    } else if s.n() == tree.original_len() {
        tree.from_original(s)
    } else {
        Err(Error::DimensionMismatch {
            what: "placement over tree nodes",
            expected: tree.len(),
            found: s.n(),
        })
    }
}

/// Exact `E[d_k(s, X)]` on a tree in `O(n k)`.
pub fn tree_exact_cost(tree: &TreeMetric, s: &Placement, k: usize) -> Result<f64> {
    if s.k() != k {
        return Err(Error::KMismatch {
            expected: k,
            found: s.k(),
        });
    }
    let s = on_tree(tree, s)?;
    let below = tree.subtree_counts(&s);
    let mut total = 0.0;
    for v in tree.edges() {
        let c = tree.edge_cost(v);
        if c == 0.0 {
            continue;
        }
        total += binom_abs_dev(below[v] as usize, tree.mass(v).clamp(0.0, 1.0), k)? * c;
    }
    Ok(total)
}

/// `sum_e | |x in T_e| - |s in T_e| | * c(e)` for one realization `x`.
pub fn edge_discrepancy_cost(tree: &TreeMetric, s: &Placement, x: &Placement) -> Result<f64> {
    if s.k() != x.k() {
        return Err(Error::KMismatch {
            expected: s.k(),
            found: x.k(),
        });
    }
    let s = on_tree(tree, s)?;
    let x = on_tree(tree, x)?;
    let bs = tree.subtree_counts(&s);
    let bx = tree.subtree_counts(&x);
    Ok(tree
        .edges()
        .map(|v| (bs[v] as f64 - bx[v] as f64).abs() * tree.edge_cost(v))
        .sum())
}
