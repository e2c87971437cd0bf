#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robotaxi_core::placement::Placement;
use robotaxi_core::{DemandDistribution, MetricSpace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shortest-path closure of random edge weights in `[0.1, 5)`: a valid metric
/// that is usually far from Euclidean.
pub fn random_metric(n: usize, r: &mut ChaCha8Rng) -> MetricSpace {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = r.random_range(0.1..5.0);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for h in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][h] + d[h][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    MetricSpace::new(d).unwrap()
}

pub fn random_placement(n: usize, k: usize, r: &mut ChaCha8Rng) -> Placement {
    Placement::from_points(n, (0..k).map(|_| r.random_range(0..n))).unwrap()
}

pub fn random_demand(n: usize, r: &mut ChaCha8Rng) -> DemandDistribution {
    let w: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0f64)).collect();
    let total: f64 = w.iter().sum();
    DemandDistribution::new(w.iter().map(|x| x / total).collect()).unwrap()
}

pub fn line(xs: &[f64]) -> MetricSpace {
    MetricSpace::new(
        xs.iter()
            .map(|a| xs.iter().map(|b| (a - b).abs()).collect())
            .collect(),
    )
    .unwrap()
}
