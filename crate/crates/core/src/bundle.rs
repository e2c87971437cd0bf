//! Instance bundles and their JSON file format.
//!
//! ```json
//! {"n": 3, "k": 2,
//!  "dist": [[0,1,1],[1,0,2],[1,2,0]],
//!  "probs": [0, 0.5, 0.5],
//!  "labels": ["c", "a", "b"],
//!  "allowable": [0, 1],
//!  "tree": {"parent": [-1, 0, 0], "edge_cost": [0, 1, 1], "probs": [0, 0.5, 0.5]}}
//! ```
//!
//! `dist` may be replaced by `"dist_file": "matrix.csv"`, a headerless CSV
//! of `n` rows, resolved relative to the bundle file. When a tree is given
//! and no distances are, the tree-induced distances are used.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::tree::{binarize_tree, GeneralTree, TreeMetric};

/// Everything that defines a placement instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceBundle {
    pub metric: MetricSpace,
    pub demand: DemandDistribution,
    pub k: usize,
    pub allowable: Option<Vec<usize>>,
    pub tree: Option<TreeMetric>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BundleFile {
    n: usize,
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist_file: Option<String>,
    probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    allowable: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tree: Option<GeneralTree>,
}

/// Tolerance for agreement between a bundle's matrix and its tree.
const TREE_AGREEMENT_REL_TOL: f64 = 1e-9;

impl InstanceBundle {
    /// Checks cross-field invariants.
    pub fn new(
        metric: MetricSpace,
        demand: DemandDistribution,
        k: usize,
        allowable: Option<Vec<usize>>,
        tree: Option<TreeMetric>,
    ) -> Result<Self> {
        let n = metric.len();
        if demand.len() != n {
            return Err(Error::DimensionMismatch {
                what: "probs",
                expected: n,
                found: demand.len(),
            });
        }
        if k == 0 {
            return Err(Error::InvariantViolation("k must be at least 1".into()));
        }
        if let Some(a) = &allowable {
            if let Some(&bad) = a.iter().find(|&&x| x >= n) {
                return Err(Error::InvariantViolation(format!(
                    "allowable point {bad} >= n = {n}"
                )));
            }
        }
        if let Some(t) = &tree {
            check_tree_agreement(&metric, &demand, t)?;
        }
        Ok(InstanceBundle {
            metric,
            demand,
            k,
            allowable,
            tree,
        })
    }

    /// A bundle whose metric is induced by `tree` on its original nodes.
    pub fn from_tree(tree: TreeMetric, k: usize) -> Result<Self> {
        let metric = tree.original_metric()?;
        let demand = DemandDistribution::new(tree.source().probs.clone())?;
        Self::new(metric, demand, k, None, Some(tree))
    }

    pub fn n(&self) -> usize {
        self.metric.len()
    }

    pub fn from_json_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let file: BundleFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        let tree = file.tree.as_ref().map(binarize_tree).transpose()?;
        let rows = match (file.dist, &file.dist_file, &tree) {
            (Some(d), None, _) => d,
            (None, Some(p), _) => {
                let path = match base_dir {
                    Some(b) => b.join(p),
                    None => Path::new(p).to_path_buf(),
                };
                read_matrix_csv(&path)?
            }
            (None, None, Some(t)) => t.original_metric()?.rows(),
            (Some(_), Some(_), _) => {
                return Err(Error::InvariantViolation(
                    "give either dist or dist_file, not both".into(),
                ))
            }
            (None, None, None) => {
                return Err(Error::InvariantViolation("bundle has no distances".into()))
            }
        };
        if rows.len() != file.n {
            return Err(Error::DimensionMismatch {
                what: "dist rows",
                expected: file.n,
                found: rows.len(),
            });
        }
        if file.probs.len() != file.n {
            return Err(Error::DimensionMismatch {
                what: "probs",
                expected: file.n,
                found: file.probs.len(),
            });
        }
        let mut metric = MetricSpace::new(rows)?;
        if let Some(labels) = file.labels {
            metric = metric.with_labels(labels)?;
        }
        let demand = DemandDistribution::new(file.probs)?;
        Self::new(metric, demand, file.k, file.allowable, tree)
    }

    pub fn to_json_string(&self) -> String {
        let file = BundleFile {
            n: self.n(),
            k: self.k,
            dist: Some(self.metric.rows()),
            dist_file: None,
            probs: self.demand.probs().to_vec(),
            labels: self.metric.labels().map(<[String]>::to_vec),
            allowable: self.allowable.clone(),
            tree: self.tree.as_ref().map(|t| t.source().clone()),
        };
        serde_json::to_string(&file).expect("bundle serializes")
    }
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<InstanceBundle> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    InstanceBundle::from_json_str(&text, path.parent())
}

pub fn save_bundle(bundle: &InstanceBundle, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, bundle.to_json_string()).map_err(|e| Error::io(path, e))
}

/// Reads a headerless CSV distance matrix.
pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse {
            line: 0,
            msg: format!("{}: {e}", path.display()),
        })?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: format!("{f:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn check_tree_agreement(
    metric: &MetricSpace,
    demand: &DemandDistribution,
    tree: &TreeMetric,
) -> Result<()> {
    let n = metric.len();
    if tree.original_len() != n {
        return Err(Error::DimensionMismatch {
            what: "tree nodes",
            expected: n,
            found: tree.original_len(),
        });
    }
    let src = &tree.source().probs;
    for i in 0..n {
        if (src[i] - demand.p(i)).abs() > 1e-9 {
            return Err(Error::InvariantViolation(format!(
                "tree probability at node {i} differs from probs"
            )));
        }
    }
    let induced = tree.all_pairs();
    let tol = TREE_AGREEMENT_REL_TOL * metric.max_distance().max(1.0);
    for i in 0..n {
        for j in 0..n {
            if (induced[i][j] - metric.d(i, j)).abs() > tol {
                return Err(Error::NotATree(format!(
                    "d({i},{j}) = {} but the tree path has length {}",
                    metric.d(i, j),
                    induced[i][j]
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> InstanceBundle {
        let m = MetricSpace::new(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 2.0],
            vec![1.0, 2.0, 0.0],
        ])
        .unwrap();
        let d = DemandDistribution::new(vec![0.0, 0.5, 0.5]).unwrap();
        InstanceBundle::new(m, d, 2, Some(vec![0]), None).unwrap()
    }

    #[test]
    fn round_trip_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.json");
        let b = star();
        save_bundle(&b, &path).unwrap();
        assert_eq!(load_bundle(&path).unwrap(), b);
    }

    #[test]
    fn rejects_bad_probs_and_k() {
        let bad = r#"{"n":2,"k":1,"dist":[[0,1],[1,0]],"probs":[0.5,0.4]}"#;
        assert!(matches!(
            InstanceBundle::from_json_str(bad, None),
            Err(Error::InvariantViolation(_))
        ));
        let bad = r#"{"n":2,"k":0,"dist":[[0,1],[1,0]],"probs":[0.5,0.5]}"#;
        assert!(matches!(
            InstanceBundle::from_json_str(bad, None),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn parse_error_has_line() {
        let bad = "{\"n\":2,\n\"k\":1,\n\"dist\": [[0,1],[1,0]],\n\"probs\": [0.5, oops]}";
        match InstanceBundle::from_json_str(bad, None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch() {
        let bad = r#"{"n":3,"k":1,"dist":[[0,1],[1,0]],"probs":[0.5,0.5]}"#;
        assert!(matches!(
            InstanceBundle::from_json_str(bad, None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dist_file_relative_to_bundle() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("m.csv"), "0, 2\n2, 0\n").unwrap();
        let path = dir.path().join("b.json");
        fs::write(&path, r#"{"n":2,"k":1,"dist_file":"m.csv","probs":[1,0]}"#).unwrap();
        let b = load_bundle(&path).unwrap();
        assert_eq!(b.metric.d(0, 1), 2.0);
    }

    #[test]
    fn tree_only_bundle() {
        let text = r#"{"n":3,"k":2,"probs":[0,0.5,0.5],
            "tree":{"parent":[-1,0,0],"edge_cost":[0,1,1],"probs":[0,0.5,0.5]}}"#;
        let b = InstanceBundle::from_json_str(text, None).unwrap();
        assert_eq!(b.metric.d(1, 2), 2.0);
        assert!(b.tree.is_some());
        let wrong = r#"{"n":3,"k":2,"dist":[[0,1,1],[1,0,1],[1,1,0]],"probs":[0,0.5,0.5],
            "tree":{"parent":[-1,0,0],"edge_cost":[0,1,1],"probs":[0,0.5,0.5]}}"#;
        assert!(matches!(
            InstanceBundle::from_json_str(wrong, None),
            Err(Error::NotATree(_))
        ));
    }
}
