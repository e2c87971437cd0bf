//! k-multisets of points, stored as count vectors.

use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};

/// A k-multiset of points.
///
/// Used for vehicle placements and rider realizations alike.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Placement {
    counts: Vec<u32>,
    k: usize,
}

impl Placement {
    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        let k: usize = counts.iter().map(|&c| c as usize).sum();
        if k == 0 {
            return Err(Error::InvariantViolation(
                "placement must hold at least one unit".into(),
            ));
        }
        Ok(Placement { counts, k })
    }

    /// Builds a placement from a list of point ids (repetitions allowed).
    pub fn from_points(n: usize, points: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut counts = vec![0u32; n];
        for p in points {
            if p >= n {
                return Err(Error::OutOfRange(format!("point {p} >= n = {n}")));
            }
            counts[p] += 1;
        }
        Self::from_counts(counts)
    }

    /// `k` copies of one point.
    pub fn all_at(n: usize, at: usize, k: usize) -> Self {
        let mut counts = vec![0u32; n];
        counts[at] = k as u32;
        Placement { counts, k }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn count(&self, i: usize) -> u32 {
        self.counts[i]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// `(point, multiplicity)` for every point with a nonzero count.
    pub fn support(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i, c))
    }

    /// The multiset as a sorted list of `k` point ids.
    pub fn expand(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.k);
        for (i, c) in self.support() {
            out.extend(std::iter::repeat_n(i, c as usize));
        }
        out
    }

    pub fn is_supported_on(&self, allowed: &[bool]) -> bool {
        self.support().all(|(i, _)| allowed[i])
    }

    /// Distribution placing mass `count / k` on each point.
    pub fn point_mass(&self) -> DemandDistribution {
        let k = self.k as f64;
        DemandDistribution::new(self.counts.iter().map(|&c| c as f64 / k).collect())
            .expect("counts sum to k")
    }
}

impl TryFrom<Vec<u32>> for Placement {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::from_counts(v)
    }
}

impl From<Placement> for Vec<u32> {
    fn from(p: Placement) -> Self {
        p.counts
    }
}

/// Number of k-multisets over n points, `C(n + k - 1, k)`, saturating.
pub fn multiset_count(n: usize, k: usize) -> u128 {
    if n == 0 {
        return u128::from(k == 0);
    }
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = match acc.checked_mul(n as u128 - 1 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// Iterates every composition of `k` into `n` nonnegative parts.
///
/// Starts at `(k, 0, .., 0)` and ends at `(0, .., 0, k)`.
#[derive(Debug, Clone)]
pub struct Multisets {
    current: Option<Vec<u32>>,
}

impl Multisets {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(n > 0);
        let mut c = vec![0u32; n];
        c[0] = k as u32;
        Multisets { current: Some(c) }
    }
}

impl Iterator for Multisets {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let n = out.len();
        if let Some(i) = out[..n - 1].iter().position(|&c| c > 0) {
            let mut c = out.clone();
            let v = c[i];
            c[i] = 0;
            c[0] = v - 1;
            c[i + 1] += 1;
            self.current = Some(c);
        }
        Some(out)
    }
}

/// Iterates all k-multisets over n points as placements.
pub fn all_placements(n: usize, k: usize) -> impl Iterator<Item = Placement> {
    assert!(k > 0);
    Multisets::new(n, k).map(move |counts| Placement { counts, k })
}

/// `ln k!` for small k, by direct summation.
pub(crate) fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Probability of drawing exactly the multiset `counts` with `k` i.i.d.
/// draws from `probs`.
pub fn multinomial_pmf(counts: &[u32], probs: &[f64]) -> f64 {
    let k: u32 = counts.iter().sum();
    let mut log_p = ln_factorial(k);
    for (&c, &p) in counts.iter().zip(probs) {
        if c == 0 {
            continue;
        }
        if p <= 0.0 {
            return 0.0;
        }
        log_p += c as f64 * p.ln() - ln_factorial(c);
    }
    log_p.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn point_mass_examples() {
        let p = Placement::from_counts(vec![1, 1, 0]).unwrap();
        assert_eq!(p.point_mass().probs(), &[0.5, 0.5, 0.0]);
        let p = Placement::from_counts(vec![4, 0]).unwrap();
        assert_eq!(p.point_mass().probs(), &[1.0, 0.0]);
        let p = Placement::from_counts(vec![2, 1]).unwrap();
        assert_eq!(p.point_mass().probs(), &[2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn zero_units_rejected() {
        assert!(Placement::from_counts(vec![0, 0]).is_err());
    }

    #[test]
    fn expand_is_sorted() {
        let p = Placement::from_points(4, [3, 1, 3, 0]).unwrap();
        assert_eq!(p.expand(), vec![0, 1, 3, 3]);
        assert_eq!(p.k(), 4);
    }

    #[test]
    fn enumeration_counts() {
        for n in 1..6 {
            for k in 1..5 {
                let all: Vec<_> = Multisets::new(n, k).collect();
                assert_eq!(all.len() as u128, multiset_count(n, k));
                let mut dedup = all.clone();
                dedup.sort();
                dedup.dedup();
                assert_eq!(dedup.len(), all.len());
                assert!(all.iter().all(|c| c.iter().sum::<u32>() == k as u32));
            }
        }
        assert_eq!(multiset_count(101, 3), 176_851);
    }

    #[test]
    fn multinomial_sums_to_one() {
        let probs = [0.1, 0.2, 0.3, 0.4];
        let total: f64 = Multisets::new(4, 3)
            .map(|c| multinomial_pmf(&c, &probs))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(multinomial_pmf(&[1, 1], &[0.0, 1.0]), 0.0);
        assert!((multinomial_pmf(&[1, 1], &[0.5, 0.5]) - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn serde_round_trip(counts in proptest::collection::vec(0u32..5, 1..8)) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let p = Placement::from_counts(counts).unwrap();
            let s = serde_json::to_string(&p).unwrap();
            let q: Placement = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(p, q);
        }
    }
}
