//! Evaluators for the expected matching cost of a placement against random
//! demand.

pub mod binomial;
mod exact;
mod mc;
mod tree;

pub use binomial::{binom_abs_dev, binom_abs_dev_table, binomial_pmf};
pub use exact::{exact_cost_enumeration, realization_distribution, EXACT_ENUMERATION_LIMIT};
pub use mc::{mc_cost, mc_cost_with, realization_costs, sample_realization, CostEstimate, Z95};
pub use tree::{edge_discrepancy_cost, tree_exact_cost};

/// Sum in a fixed binary-tree order; the result depends only on the slice
/// contents, never on how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let m = xs.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / m as f64;
    if m < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}
