//! Instance generators: the star instance, the coverage reduction gadget and
//! random fixtures.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::bundle::InstanceBundle;
use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::rng::{derive_seed, domain, stream};
use crate::tree::{binarize_tree, GeneralTree, TreeMetric};

/// Default `epsilon` for coverage instances.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Largest `epsilon` of the hardness regime.
pub const HARDNESS_EPSILON_MAX: f64 = 0.06;

/// Star on `n` points: center `0` at distance 1 from every other point,
/// other points pairwise at distance 2, demand uniform off the center.
pub fn gen_star(n: usize, k: usize) -> Result<InstanceBundle> {
    if n < 3 {
        return Err(Error::BadDimensions(format!("star needs n >= 3, got {n}")));
    }
    if k == 0 {
        return Err(Error::BadDimensions("k must be at least 1".into()));
    }
    let mut flat = vec![2.0; n * n];
    for i in 0..n {
        flat[i * n + i] = 0.0;
        if i > 0 {
            flat[i] = 1.0;
            flat[i * n] = 1.0;
        }
    }
    let metric = MetricSpace::from_flat(n, flat)?;
    let demand = DemandDistribution::uniform_on(n, &(1..n).collect::<Vec<_>>())?;
    InstanceBundle::new(metric, demand, k, None, None)
}

/// An `l`-coverage instance over elements `0..N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageInstance {
    #[serde(rename = "N")]
    pub n_elements: usize,
    #[serde(rename = "l")]
    pub budget: usize,
    pub epsilon: f64,
    pub sets: Vec<Vec<usize>>,
}

impl CoverageInstance {
    pub fn new(
        n_elements: usize,
        budget: usize,
        epsilon: f64,
        sets: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let c = CoverageInstance {
            n_elements,
            budget,
            epsilon,
            sets,
        };
        c.validate()?;
        Ok(c)
    }

    /// Shape checks: `l` divides `N`, every set has `N / l` distinct
    /// elements, and `0 < epsilon <= 1` so the gadget is a metric.
    pub fn validate(&self) -> Result<()> {
        let (n, l) = (self.n_elements, self.budget);
        if n == 0 || l == 0 {
            return Err(Error::InvariantViolation("N and l must be positive".into()));
        }
        if n % l != 0 {
            return Err(Error::NotDivisible(n, l));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvariantViolation(format!(
                "epsilon {} outside (0, 1]",
                self.epsilon
            )));
        }
        let size = n / l;
        for (i, set) in self.sets.iter().enumerate() {
            let mut s = set.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != set.len() {
                return Err(Error::InvariantViolation(format!(
                    "set {i} repeats an element"
                )));
            }
            if let Some(&e) = s.iter().find(|&&e| e >= n) {
                return Err(Error::InvariantViolation(format!(
                    "set {i} has element {e} >= N = {n}"
                )));
            }
            if s.len() != size {
                return Err(Error::InvariantViolation(format!(
                    "set {i} has {} elements, expected {size}",
                    s.len()
                )));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    /// `2 l / N`, the smallest epsilon of the hardness regime.
    pub fn epsilon_floor(&self) -> f64 {
        2.0 * self.budget as f64 / self.n_elements as f64
    }

    /// Whether `2 l / N <= epsilon <= 0.06`.
    pub fn in_hardness_regime(&self) -> bool {
        self.epsilon >= self.epsilon_floor() && self.epsilon <= HARDNESS_EPSILON_MAX
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let c: CoverageInstance = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("coverage instance serializes")
    }
}

/// Reduction bundle: element points `0..N`, then set points `N..N+m`.
///
/// Element to set distance is 1 for members and `2 - epsilon` otherwise,
/// elements are pairwise 2 apart, sets pairwise 1 apart. Demand is uniform
/// over elements and `k = l`.
pub fn gen_coverage_reduction(cov: &CoverageInstance) -> Result<InstanceBundle> {
    cov.validate()?;
    let n = cov.n_elements;
    let total = n + cov.m();
    let far = 2.0 - cov.epsilon;
    let mut flat = vec![0.0; total * total];
    for i in 0..total {
        for j in 0..total {
            flat[i * total + j] = match (i < n, j < n) {
                _ if i == j => 0.0,
                (true, true) => 2.0,
                (false, false) => 1.0,
                _ => far,
            };
        }
    }
    for (s, set) in cov.sets.iter().enumerate() {
        let sp = n + s;
        for &e in set {
            flat[e * total + sp] = 1.0;
            flat[sp * total + e] = 1.0;
        }
    }
    let metric = MetricSpace::from_flat(total, flat)?;
    let demand = DemandDistribution::uniform_on(total, &(0..n).collect::<Vec<_>>())?;
    InstanceBundle::new(metric, demand, cov.budget, None, None)
}

/// `l` disjoint sets partitioning `0..N` in order, followed by `decoys`
/// sets drawn without replacement from `seed`. Epsilon is
/// `max(2 l / N, requested)`.
pub fn gen_full_cover_system(
    n_elements: usize,
    budget: usize,
    decoys: usize,
    epsilon: f64,
    seed: u64,
) -> Result<CoverageInstance> {
    if budget == 0 || !n_elements.is_multiple_of(budget) {
        return Err(Error::NotDivisible(n_elements, budget));
    }
    let size = n_elements / budget;
    let mut sets: Vec<Vec<usize>> = (0..budget)
        .map(|b| (b * size..(b + 1) * size).collect())
        .collect();
    for d in 0..decoys as u64 {
        let mut rng = stream(derive_seed(seed, domain::GENERATOR), domain::GENERATOR, d);
        let mut set = rand::seq::index::sample(&mut rng, n_elements, size).into_vec();
        set.sort_unstable();
        sets.push(set);
    }
    let floor = 2.0 * budget as f64 / n_elements as f64;
    CoverageInstance::new(n_elements, budget, epsilon.max(floor), sets)
}

/// `l (1 + (1 - 1/l)^l)`: cost bound for the covering placement.
pub fn full_cover_bound(l: usize) -> f64 {
    let l = l as f64;
    l * (1.0 + (1.0 - 1.0 / l).powf(l))
}

/// `k (1 + e^(-1 + 2/e) - e^(-1) - 3 (1 + 1/e) epsilon)`: reference lower
/// bound for partial covering instances. Reported, never checked.
pub fn partial_cover_reference(k: usize, epsilon: f64) -> f64 {
    let e = std::f64::consts::E;
    k as f64 * (1.0 + (-1.0 + 2.0 / e).exp() - 1.0 / e - 3.0 * (1.0 + 1.0 / e) * epsilon)
}

/// `2k (1 - k/(n-1))^k`: lower bound for placements on the star's leaves.
pub fn star_support_bound(n: usize, k: usize) -> f64 {
    let kf = k as f64;
    2.0 * kf * (1.0 - kf / (n as f64 - 1.0)).powf(kf)
}

/// `n` points uniform in the unit square with Euclidean distances.
pub fn gen_random_euclidean(n: usize, seed: u64) -> Result<MetricSpace> {
    let pts = random_points(n, seed)?;
    let mut flat = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            flat[i * n + j] = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
        }
    }
    MetricSpace::from_flat(n, flat)
}

/// Coordinates behind [`gen_random_euclidean`].
pub fn random_points(n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if n < 2 {
        return Err(Error::BadDimensions(format!("need n >= 2, got {n}")));
    }
    let mut rng = stream(seed, domain::GENERATOR, 0);
    Ok((0..n)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect())
}

/// Random recursive tree on `n` nodes (node `i` attaches to a uniform
/// earlier node), edge costs uniform in `(0, 1]`, Dirichlet(1) demand;
/// returned unbinarized.
pub fn gen_random_general_tree(n: usize, seed: u64) -> Result<GeneralTree> {
    if n < 2 {
        return Err(Error::BadDimensions(format!("need n >= 2, got {n}")));
    }
    let mut rng = stream(seed, domain::GENERATOR, 1);
    let mut parent = vec![-1i64];
    let mut edge_cost = vec![0.0];
    for i in 1..n {
        parent.push(rng.random_range(0..i) as i64);
        edge_cost.push(1.0 - rng.random::<f64>());
    }
    let probs = gen_random_distribution(n, derive_seed(seed, 1), 1.0)?
        .probs()
        .to_vec();
    Ok(GeneralTree {
        parent,
        edge_cost,
        probs,
    })
}

/// [`gen_random_general_tree`], binarized.
pub fn gen_random_tree(n: usize, seed: u64) -> Result<TreeMetric> {
    binarize_tree(&gen_random_general_tree(n, seed)?)
}

/// Symmetric Dirichlet draw with the given concentration: normalized
/// Gamma(concentration, 1) variates. Small concentrations put most mass on
/// a few points; large ones approach uniform.
pub fn gen_random_distribution(
    n: usize,
    seed: u64,
    concentration: f64,
) -> Result<DemandDistribution> {
    if n < 2 {
        return Err(Error::BadDimensions(format!("need n >= 2, got {n}")));
    }
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "concentration {concentration} must be positive"
        )));
    }
    let gamma = Gamma::new(concentration, 1.0).map_err(|e| Error::OutOfRange(e.to_string()))?;
    let mut rng = stream(seed, domain::GENERATOR, 2);
    let mut w: Vec<f64> = (0..n).map(|_| gamma.sample(&mut rng)).collect();
    let mut total: f64 = w.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        // All draws underflowed; fall back to one point.
        w = vec![0.0; n];
        w[rng.random_range(0..n)] = 1.0;
        total = 1.0;
    }
    let mut probs: Vec<f64> = w.iter().map(|x| x / total).collect();
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= s);
    DemandDistribution::new(probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_three_points() {
        let b = gen_star(3, 1).unwrap();
        assert_eq!(
            b.metric.rows(),
            vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 2.0],
                vec![1.0, 2.0, 0.0]
            ]
        );
        assert_eq!(b.demand.probs(), &[0.0, 0.5, 0.5]);
        assert!(matches!(gen_star(2, 1), Err(Error::BadDimensions(_))));
    }

    #[test]
    fn reduction_distances() {
        let cov = CoverageInstance::new(4, 2, 0.05, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let b = gen_coverage_reduction(&cov).unwrap();
        let m = &b.metric;
        assert_eq!(m.len(), 6);
        assert_eq!(m.d(0, 4), 1.0);
        assert_eq!(m.d(0, 5), 1.95);
        assert_eq!(m.d(0, 1), 2.0);
        assert_eq!(m.d(4, 5), 1.0);
        assert_eq!(b.k, 2);
        assert_eq!(b.demand.probs(), &[0.25, 0.25, 0.25, 0.25, 0.0, 0.0]);
        assert!(!cov.in_hardness_regime());
    }

    #[test]
    fn reduction_is_metric_across_epsilon() {
        for eps in [1e-6, 0.05, 0.5, 1.0] {
            let cov =
                CoverageInstance::new(6, 2, eps, vec![vec![0, 1, 2], vec![3, 4, 5], vec![0, 3, 5]])
                    .unwrap();
            gen_coverage_reduction(&cov).unwrap();
        }
        assert!(CoverageInstance::new(4, 2, 1.5, vec![vec![0, 1]]).is_err());
        assert!(CoverageInstance::new(4, 2, 0.5, vec![vec![0, 1, 2]]).is_err());
        assert!(matches!(
            CoverageInstance::new(5, 2, 0.5, vec![]),
            Err(Error::NotDivisible(5, 2))
        ));
    }

    #[test]
    fn full_cover_partition() {
        let c = gen_full_cover_system(4, 2, 0, 0.05, 0).unwrap();
        assert_eq!(c.sets, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(c.epsilon, 1.0);
        let c = gen_full_cover_system(25, 5, 3, 0.05, 9).unwrap();
        assert_eq!(c.m(), 8);
        assert!((c.epsilon - 0.4).abs() < 1e-15);
        let back = CoverageInstance::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(back, c);
        assert!(matches!(
            gen_full_cover_system(5, 2, 0, 0.05, 0),
            Err(Error::NotDivisible(5, 2))
        ));
    }

    #[test]
    fn json_keys() {
        let v: serde_json::Value = serde_json::from_str(
            &CoverageInstance::new(2, 1, 1.0, vec![vec![0, 1]])
                .unwrap()
                .to_json_string(),
        )
        .unwrap();
        for key in ["N", "l", "epsilon", "sets"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn bounds() {
        assert!((full_cover_bound(5) - 6.6384).abs() < 1e-4);
        assert!((star_support_bound(101, 3) - 5.4761).abs() < 1e-3);
        assert!(partial_cover_reference(5, 0.0) > 5.0 * (1.0 + (-1f64).exp()));
    }

    #[test]
    fn random_fixtures_are_valid() {
        for seed in 0..100 {
            gen_random_euclidean(8, seed).unwrap();
            let t = gen_random_tree(7, seed).unwrap();
            assert_eq!(t.original_len(), 7);
            t.induced_metric().unwrap();
        }
    }

    #[test]
    fn concentration_approaches_uniform() {
        let n = 20;
        let dev = |c: f64| {
            (0..20u64)
                .map(|s| {
                    let d = gen_random_distribution(n, s, c).unwrap();
                    d.probs()
                        .iter()
                        .map(|p| (p - 1.0 / n as f64).abs())
                        .fold(0.0, f64::max)
                })
                .sum::<f64>()
        };
        assert!(dev(1000.0) < dev(10.0));
        assert!(dev(10.0) < dev(0.1));
    }
}
