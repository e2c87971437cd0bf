//! Demand distributions over the points of a metric space.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accepted deviation of the probability total from one.
pub const PROB_SUM_TOL: f64 = 1e-9;
/// Totals within this distance of one are renormalized on construction.
pub const NORMALIZE_TOL: f64 = 1e-6;

/// A probability vector over points `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DemandDistribution {
    probs: Vec<f64>,
}

impl DemandDistribution {
    /// Builds a distribution. Totals within [`PROB_SUM_TOL`] of one are kept
    /// bit-for-bit, totals within [`NORMALIZE_TOL`] are renormalized, and
    /// anything further off is rejected.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvariantViolation("empty probability vector".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvariantViolation(format!(
                    "probability {p} at point {i}"
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZE_TOL {
            return Err(Error::InvariantViolation(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let probs = if (total - 1.0).abs() <= PROB_SUM_TOL {
            probs
        } else {
            probs.into_iter().map(|p| p / total).collect()
        };
        Ok(DemandDistribution { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        DemandDistribution {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Uniform over `support`, zero elsewhere.
    pub fn uniform_on(n: usize, support: &[usize]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvariantViolation("empty support".into()));
        }
        let mut probs = vec![0.0; n];
        let w = 1.0 / support.len() as f64;
        for &s in support {
            if s >= n {
                return Err(Error::OutOfRange(format!("point {s} >= n = {n}")));
            }
            probs[s] += w;
        }
        Self::new(probs)
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        DemandDistribution { probs }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    #[inline]
    pub fn p(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(&self.probs)
    }
}

impl TryFrom<Vec<f64>> for DemandDistribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DemandDistribution> for Vec<f64> {
    fn from(d: DemandDistribution) -> Self {
        d.probs
    }
}

/// Inverse-CDF sampler over nonnegative weights.
///
/// Points with zero weight are never returned.
#[derive(Debug, Clone)]
pub struct Sampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl Sampler {
    pub fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|&w| {
                acc += w;
                acc
            })
            .collect();
        let last_positive = weights
            .iter()
            .rposition(|&w| w > 0.0)
            .expect("sampler needs a positive weight");
        Sampler {
            cumulative,
            last_positive,
        }
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Maps `u` in `[0, 1)` to a point.
    pub fn pick(&self, u: f64) -> usize {
        let target = u * self.total();
        let i = self.cumulative.partition_point(|&c| c <= target);
        i.min(self.last_positive)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.pick(rng.random::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renormalizes_small_drift() {
        let d = DemandDistribution::new(vec![0.5, 0.5 + 5e-7]).unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() <= PROB_SUM_TOL);
    }

    #[test]
    fn rejects_large_drift_and_negatives() {
        assert!(DemandDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(DemandDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(DemandDistribution::new(vec![]).is_err());
    }

    #[test]
    fn sampler_skips_zero_weights() {
        let s = Sampler::new(&[0.0, 0.5, 0.0, 0.5, 0.0]);
        for i in 0..1000 {
            let u = i as f64 / 1000.0;
            let x = s.pick(u);
            assert!(x == 1 || x == 3, "u={u} -> {x}");
        }
        assert_eq!(s.pick(0.0), 1);
        assert_eq!(s.pick(0.5), 3);
        assert_eq!(s.pick(0.999_999_999_999), 3);
    }

    #[test]
    fn serde_validates() {
        let bad: std::result::Result<DemandDistribution, _> = serde_json::from_str("[0.2, 0.2]");
        assert!(bad.is_err());
        let ok: DemandDistribution = serde_json::from_str("[0.25, 0.75]").unwrap();
        assert_eq!(ok.p(1), 0.75);
    }
}
