//! Finite metric spaces stored as dense distance matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, MetricViolation, Result};

/// Index of a point in a [`MetricSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl PointId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for PointId {
    fn from(i: usize) -> Self {
        PointId(i)
    }
}

/// Relative tolerance of the triangle-inequality check.
pub const TRIANGLE_REL_TOL: f64 = 1e-9;

/// A validated finite metric space.
///
/// Distances are kept row-major in a flat buffer; the matrix is symmetric
/// with an exactly zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    n: usize,
    dist: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl MetricSpace {
    /// Validates a square matrix against the metric axioms.
    ///
    /// Every violation found is reported, not only the first one.
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        let mut violations = Vec::new();
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != n {
                violations.push(MetricViolation::NonSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidMetric(violations));
        }
        let dist: Vec<f64> = matrix.into_iter().flatten().collect();
        Self::from_flat(n, dist)
    }

    /// Same as [`MetricSpace::new`] on a row-major buffer of length `n * n`.
    pub fn from_flat(n: usize, dist: Vec<f64>) -> Result<Self> {
        if dist.len() != n * n {
            return Err(Error::DimensionMismatch {
                what: "distance buffer",
                expected: n * n,
                found: dist.len(),
            });
        }
        let violations = check_axioms(n, &dist);
        if violations.is_empty() {
            Ok(MetricSpace {
                n,
                dist,
                labels: None,
            })
        } else {
            Err(Error::InvalidMetric(violations))
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "labels",
                expected: self.n,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    #[inline]
    pub fn dist(&self, a: PointId, b: PointId) -> f64 {
        self.d(a.0, b.0)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn flat(&self) -> &[f64] {
        &self.dist
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist
            .chunks(self.n.max(1))
            .map(<[f64]>::to_vec)
            .take(self.n)
            .collect()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }
}

fn check_axioms(n: usize, d: &[f64]) -> Vec<MetricViolation> {
    let mut out = Vec::new();
    let mut finite = true;
    for i in 0..n {
        for j in 0..n {
            let v = d[i * n + j];
            if !v.is_finite() {
                out.push(MetricViolation::NonFinite { i, j });
                finite = false;
            } else if v < 0.0 {
                out.push(MetricViolation::NegativeEntry { i, j, value: v });
            }
        }
    }
    if !finite {
        return out;
    }
    for i in 0..n {
        if d[i * n + i] != 0.0 {
            out.push(MetricViolation::NonzeroDiagonal { i });
        }
        for j in (i + 1)..n {
            if d[i * n + j] != d[j * n + i] {
                out.push(MetricViolation::AsymmetricPair { i, j });
            }
        }
    }
    let tol = TRIANGLE_REL_TOL * d.iter().copied().fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dij = d[i * n + j];
            for m in 0..n {
                if m == i || m == j {
                    continue;
                }
                let slack = dij - (d[i * n + m] + d[m * n + j]);
                if slack > tol {
                    out.push(MetricViolation::TriangleViolation { i, m, j, slack });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violations(m: Vec<Vec<f64>>) -> Vec<MetricViolation> {
        match MetricSpace::new(m) {
            Err(Error::InvalidMetric(v)) => v,
            other => panic!("expected violations, got {other:?}"),
        }
    }

    #[test]
    fn two_point_space() {
        let m = MetricSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.d(0, 1), 1.0);
    }

    #[test]
    fn triangle_violation_names_triple() {
        let v = violations(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 3.0],
            vec![1.0, 3.0, 0.0],
        ]);
        assert!(v.contains(&MetricViolation::TriangleViolation {
            i: 1,
            m: 0,
            j: 2,
            slack: 1.0
        }));
        assert!(v.contains(&MetricViolation::TriangleViolation {
            i: 2,
            m: 0,
            j: 1,
            slack: 1.0
        }));
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn reports_every_axiom() {
        let v = violations(vec![vec![0.5, -1.0], vec![2.0, 0.0]]);
        assert!(v
            .iter()
            .any(|x| matches!(x, MetricViolation::NegativeEntry { i: 0, j: 1, .. })));
        assert!(v.contains(&MetricViolation::NonzeroDiagonal { i: 0 }));
        assert!(v.contains(&MetricViolation::AsymmetricPair { i: 0, j: 1 }));
    }

    #[test]
    fn non_square() {
        let v = violations(vec![vec![0.0, 1.0], vec![1.0]]);
        assert_eq!(
            v,
            vec![MetricViolation::NonSquare {
                row: 1,
                len: 1,
                expected: 2
            }]
        );
    }

    #[test]
    fn non_finite() {
        let v = violations(vec![vec![0.0, f64::NAN], vec![f64::INFINITY, 0.0]]);
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn tolerance_scales_with_max_entry() {
        let big = 1e6;
        let eps = 1e-4; // below 1e-9 * 2e6
        let m = vec![
            vec![0.0, big, big],
            vec![big, 0.0, 2.0 * big + eps],
            vec![big, 2.0 * big + eps, 0.0],
        ];
        assert!(MetricSpace::new(m).is_ok());
    }
}
