use super::pairwise_sum;
use crate::bundle::InstanceBundle;
use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::matching::matching_distance;
use crate::placement::{multinomial_pmf, multiset_count, Multisets, Placement};

/// Largest number of realizations [`exact_cost_enumeration`] will visit.
pub const EXACT_ENUMERATION_LIMIT: u128 = 100_000;

/// Every k-multiset with positive probability under `k` i.i.d. draws from
/// `demand`, with that probability.
///
/// Only support points are enumerated; realizations touching a
/// zero-probability point have probability zero.
pub fn realization_distribution(
    demand: &DemandDistribution,
    k: usize,
) -> Result<Vec<(Placement, f64)>> {
    let support: Vec<usize> = demand.support().collect();
    let count = multiset_count(support.len(), k);
    if count > EXACT_ENUMERATION_LIMIT {
        return Err(Error::TooLarge(format!(
            "{count} realizations over {} support points with k = {k}",
            support.len()
        )));
    }
    let probs: Vec<f64> = support.iter().map(|&i| demand.p(i)).collect();
    let n = demand.len();
    Ok(Multisets::new(support.len(), k)
        .map(|local| {
            let w = multinomial_pmf(&local, &probs);
            let mut counts = vec![0u32; n];
            for (&i, &c) in support.iter().zip(&local) {
                counts[i] = c;
            }
            (Placement::from_counts(counts).expect("k >= 1"), w)
        })
        .collect())
}

/// `E[d_k(s, X)]` by summing over every realization `X`.
pub fn exact_cost_enumeration(bundle: &InstanceBundle, s: &Placement) -> Result<f64> {
    if s.k() != bundle.k {
        return Err(Error::KMismatch {
            expected: bundle.k,
            found: s.k(),
        });
    }
    let terms = realization_distribution(&bundle.demand, bundle.k)?
        .into_iter()
        .map(|(x, w)| Ok(w * matching_distance(&bundle.metric, s, &x)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricSpace;

    #[test]
    fn k1_is_weighted_median_objective() {
        let m = MetricSpace::new(vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 2.0],
            vec![3.0, 2.0, 0.0],
        ])
        .unwrap();
        let d = DemandDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let b = InstanceBundle::new(m.clone(), d.clone(), 1, None, None).unwrap();
        for x in 0..3 {
            let want: f64 = (0..3).map(|y| d.p(y) * m.d(x, y)).sum();
            let got = exact_cost_enumeration(&b, &Placement::all_at(3, x, 1)).unwrap();
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn two_point_line() {
        let m = MetricSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let b = InstanceBundle::new(m, DemandDistribution::uniform(2), 1, None, None).unwrap();
        assert_eq!(
            exact_cost_enumeration(&b, &Placement::all_at(2, 0, 1)).unwrap(),
            0.5
        );
    }

    #[test]
    fn too_large() {
        let n = 60;
        let m = MetricSpace::new(
            (0..n)
                .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
                .collect(),
        )
        .unwrap();
        let b = InstanceBundle::new(m, DemandDistribution::uniform(n), 4, None, None).unwrap();
        assert!(matches!(
            exact_cost_enumeration(&b, &Placement::all_at(n, 0, 4)),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn distribution_sums_to_one() {
        let d = DemandDistribution::new(vec![0.1, 0.0, 0.6, 0.3]).unwrap();
        let dist = realization_distribution(&d, 3).unwrap();
        assert_eq!(dist.len(), 10);
        let total: f64 = dist.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(dist.iter().all(|(x, _)| x.count(1) == 0));
    }
}
