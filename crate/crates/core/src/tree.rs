//! Rooted binary tree metrics.
//!
//! Arbitrary rooted trees are binarized before use: a node with `c > 2`
//! children becomes a left-leaning chain of `c - 1` binary nodes joined by
//! zero-cost edges, and a node with a single child gets a zero-cost,
//! zero-probability sibling leaf. Introduced nodes sit at distance zero from
//! the original node they expand, so every original pairwise distance is
//! preserved and placements on introduced nodes map back without changing
//! any cost.

use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::placement::Placement;

/// Tree as given in an instance file: parent pointers with `-1` at the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralTree {
    pub parent: Vec<i64>,
    /// Cost of the edge from each node to its parent; ignored at the root.
    pub edge_cost: Vec<f64>,
    pub probs: Vec<f64>,
}

impl GeneralTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Checks shape and returns `(root, children lists)`.
    fn structure(&self) -> Result<(usize, Vec<Vec<usize>>)> {
        let n = self.parent.len();
        if n == 0 {
            return Err(Error::BadDimensions("tree has no nodes".into()));
        }
        if self.edge_cost.len() != n {
            return Err(Error::DimensionMismatch {
                what: "tree edge_cost",
                expected: n,
                found: self.edge_cost.len(),
            });
        }
        if self.probs.len() != n {
            return Err(Error::DimensionMismatch {
                what: "tree probs",
                expected: n,
                found: self.probs.len(),
            });
        }
        let mut roots = Vec::new();
        let mut children = vec![Vec::new(); n];
        for (v, &p) in self.parent.iter().enumerate() {
            if p < 0 {
                roots.push(v);
            } else {
                let p = p as usize;
                if p >= n {
                    return Err(Error::OutOfRange(format!("parent {p} of node {v} >= {n}")));
                }
                if p == v {
                    return Err(Error::CyclicInput(v));
                }
                let c = self.edge_cost[v];
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::NegativeEdgeCost { node: v, cost: c });
                }
                children[p].push(v);
            }
        }
        let root = match roots.as_slice() {
            [] => return Err(Error::CyclicInput(0)),
            [r] => *r,
            [_, second, ..] => return Err(Error::DisconnectedInput(*second)),
        };
        // Every node must reach the root by following parents.
        let mut state = vec![0u8; n]; // 0 unseen, 1 on current walk, 2 reaches root
        state[root] = 2;
        for start in 0..n {
            let mut path = Vec::new();
            let mut v = start;
            while state[v] == 0 {
                state[v] = 1;
                path.push(v);
                v = self.parent[v] as usize;
            }
            if state[v] == 1 {
                return Err(Error::CyclicInput(v));
            }
            for u in path {
                state[u] = 2;
            }
        }
        Ok((root, children))
    }
}

/// A rooted binary tree with edge costs and node probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeMetric {
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Option<(usize, usize)>>,
    /// Cost of the edge into each node from its parent (0 at the root).
    edge_cost: Vec<f64>,
    probs: DemandDistribution,
    mass: Vec<f64>,
    /// Children before parents, root last.
    post_order: Vec<usize>,
    /// Original node that each node is collocated with.
    origin: Vec<usize>,
    n_original: usize,
    source: GeneralTree,
}

impl TreeMetric {
    /// Builds a tree that must already be binary: every node has zero or
    /// two children.
    pub fn from_binary(tree: &GeneralTree) -> Result<Self> {
        let (root, children) = tree.structure()?;
        let n = tree.len();
        let mut pairs = Vec::with_capacity(n);
        for (u, ch) in children.iter().enumerate() {
            match ch.as_slice() {
                [] => pairs.push(None),
                [a, b] => pairs.push(Some((*a, *b))),
                other => return Err(Error::NotBinary(u, other.len())),
            }
        }
        let parent = tree
            .parent
            .iter()
            .map(|&p| (p >= 0).then_some(p as usize))
            .collect();
        let mut edge_cost = tree.edge_cost.clone();
        edge_cost[root] = 0.0;
        let probs = DemandDistribution::new(tree.probs.clone())?;
        Ok(Self::assemble(
            root,
            parent,
            pairs,
            edge_cost,
            probs,
            (0..n).collect(),
            tree.clone(),
        ))
    }

    fn assemble(
        root: usize,
        parent: Vec<Option<usize>>,
        children: Vec<Option<(usize, usize)>>,
        edge_cost: Vec<f64>,
        probs: DemandDistribution,
        origin: Vec<usize>,
        source: GeneralTree,
    ) -> Self {
        let n = parent.len();
        let mut post_order = Vec::with_capacity(n);
        let mut stack = vec![(root, false)];
        while let Some((u, expanded)) = stack.pop() {
            if expanded {
                post_order.push(u);
                continue;
            }
            stack.push((u, true));
            if let Some((l, r)) = children[u] {
                stack.push((r, false));
                stack.push((l, false));
            }
        }
        let mut t = TreeMetric {
            root,
            parent,
            children,
            edge_cost,
            probs,
            mass: vec![0.0; n],
            post_order,
            origin,
            n_original: source.len(),
            source,
        };
        t.mass = subtree_masses(&t);
        t
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, u: usize) -> Option<usize> {
        self.parent[u]
    }

    pub fn children(&self, u: usize) -> Option<(usize, usize)> {
        self.children[u]
    }

    pub fn is_leaf(&self, u: usize) -> bool {
        self.children[u].is_none()
    }

    /// Cost of the edge between `u` and its parent.
    pub fn edge_cost(&self, u: usize) -> f64 {
        self.edge_cost[u]
    }

    pub fn probs(&self) -> &DemandDistribution {
        &self.probs
    }

    /// Probability mass of the subtree rooted at `u`.
    pub fn mass(&self, u: usize) -> f64 {
        self.mass[u]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn post_order(&self) -> &[usize] {
        &self.post_order
    }

    /// Non-root nodes; each identifies the edge to its parent.
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&u| u != self.root)
    }

    /// Number of nodes of the tree before binarization.
    pub fn original_len(&self) -> usize {
        self.n_original
    }

    /// The tree this one was built from, before binarization.
    pub fn source(&self) -> &GeneralTree {
        &self.source
    }

    /// Original node that `u` is collocated with.
    pub fn origin(&self, u: usize) -> usize {
        self.origin[u]
    }

    /// Units placed in each subtree.
    pub fn subtree_counts(&self, s: &Placement) -> Vec<u32> {
        let mut acc: Vec<u32> = s.counts().to_vec();
        for &u in &self.post_order {
            if let Some((l, r)) = self.children[u] {
                acc[u] += acc[l] + acc[r];
            }
        }
        acc
    }

    /// Shortest-path distances between all nodes.
    pub fn all_pairs(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for v in self.edges() {
            let p = self.parent[v].unwrap();
            adj[p].push((v, self.edge_cost[v]));
            adj[v].push((p, self.edge_cost[v]));
        }
        (0..n)
            .map(|src| {
                let mut d = vec![f64::NAN; n];
                d[src] = 0.0;
                let mut stack = vec![src];
                while let Some(u) = stack.pop() {
                    for &(v, c) in &adj[u] {
                        if d[v].is_nan() {
                            d[v] = d[u] + c;
                            stack.push(v);
                        }
                    }
                }
                d
            })
            .collect()
    }

    /// The metric induced on all nodes, including introduced ones.
    pub fn induced_metric(&self) -> Result<MetricSpace> {
        MetricSpace::new(symmetrize(self.all_pairs()))
    }

    /// The metric induced on the original nodes only.
    pub fn original_metric(&self) -> Result<MetricSpace> {
        let full = self.all_pairs();
        let m = self.n_original;
        MetricSpace::new(symmetrize(
            full.into_iter().take(m).map(|r| r[..m].to_vec()).collect(),
        ))
    }

    /// Moves units on introduced nodes to the original node they expand.
    pub fn to_original(&self, s: &Placement) -> Placement {
        let mut counts = vec![0u32; self.n_original];
        for (u, c) in s.support() {
            counts[self.origin[u]] += c;
        }
        Placement::from_counts(counts).expect("nonempty")
    }

    /// Embeds a placement over original nodes into the binarized tree.
    pub fn from_original(&self, s: &Placement) -> Result<Placement> {
        if s.n() != self.n_original {
            return Err(Error::DimensionMismatch {
                what: "placement",
                expected: self.n_original,
                found: s.n(),
            });
        }
        let mut counts = s.counts().to_vec();
        counts.resize(self.len(), 0);
        Placement::from_counts(counts)
    }
}

/// Path sums accumulate in traversal order, so `d[i][j]` and `d[j][i]` can
/// differ in the last bit; keep the upper triangle.
fn symmetrize(mut d: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = d.len();
    for i in 0..n {
        for j in 0..i {
            d[i][j] = d[j][i];
        }
    }
    d
}

/// Binarizes an arbitrary rooted tree; original node ids are kept and new
/// nodes are appended after them.
pub fn binarize_tree(tree: &GeneralTree) -> Result<TreeMetric> {
    let (root, kids) = tree.structure()?;
    let n0 = tree.len();
    let mut parent: Vec<Option<usize>> = tree
        .parent
        .iter()
        .map(|&p| (p >= 0).then_some(p as usize))
        .collect();
    let mut edge_cost = tree.edge_cost.clone();
    edge_cost[root] = 0.0;
    let mut probs = tree.probs.clone();
    let mut children: Vec<Option<(usize, usize)>> = vec![None; n0];
    let mut origin: Vec<usize> = (0..n0).collect();

    #[allow(clippy::too_many_arguments)]
    fn add_node(
        parent: &mut Vec<Option<usize>>,
        children: &mut Vec<Option<(usize, usize)>>,
        edge_cost: &mut Vec<f64>,
        probs: &mut Vec<f64>,
        origin: &mut Vec<usize>,
        p: usize,
        home: usize,
    ) -> usize {
        parent.push(Some(p));
        children.push(None);
        edge_cost.push(0.0);
        probs.push(0.0);
        origin.push(home);
        parent.len() - 1
    }

    for u in 0..n0 {
        match kids[u].as_slice() {
            [] => {}
            [only] => {
                let pad = add_node(
                    &mut parent,
                    &mut children,
                    &mut edge_cost,
                    &mut probs,
                    &mut origin,
                    u,
                    u,
                );
                children[u] = Some((*only, pad));
            }
            [a, b] => children[u] = Some((*a, *b)),
            many => {
                let mut hub = u;
                for (i, &c) in many.iter().enumerate() {
                    if i == many.len() - 2 {
                        let last = many[i + 1];
                        parent[c] = Some(hub);
                        parent[last] = Some(hub);
                        children[hub] = Some((c, last));
                        break;
                    }
                    let next = add_node(
                        &mut parent,
                        &mut children,
                        &mut edge_cost,
                        &mut probs,
                        &mut origin,
                        hub,
                        u,
                    );
                    parent[c] = Some(hub);
                    children[hub] = Some((c, next));
                    hub = next;
                }
            }
        }
    }
    let probs = DemandDistribution::new(probs)?;
    Ok(TreeMetric::assemble(
        root,
        parent,
        children,
        edge_cost,
        probs,
        origin,
        tree.clone(),
    ))
}

/// Subtree probability masses, accumulated bottom-up.
pub fn subtree_masses(tree: &TreeMetric) -> Vec<f64> {
    let mut mass = tree.probs.probs().to_vec();
    for &u in &tree.post_order {
        if let Some((l, r)) = tree.children[u] {
            mass[u] += mass[l] + mass[r];
        }
    }
    mass
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt(parent: &[i64], cost: &[f64], probs: &[f64]) -> GeneralTree {
        GeneralTree {
            parent: parent.to_vec(),
            edge_cost: cost.to_vec(),
            probs: probs.to_vec(),
        }
    }

    #[test]
    fn masses_two_leaves() {
        let t =
            TreeMetric::from_binary(&gt(&[-1, 0, 0], &[0.0, 1.0, 1.0], &[0.0, 0.5, 0.5])).unwrap();
        assert_eq!(t.masses(), &[1.0, 0.5, 0.5]);
    }

    #[test]
    fn masses_chain() {
        let t = binarize_tree(&gt(&[-1, 0, 1], &[0.0, 1.0, 1.0], &[0.2, 0.3, 0.5])).unwrap();
        assert!((t.mass(0) - 1.0).abs() < 1e-12);
        assert!((t.mass(1) - 0.8).abs() < 1e-12);
        assert_eq!(t.mass(2), 0.5);
    }

    #[test]
    fn zero_probability_leaf() {
        let t =
            TreeMetric::from_binary(&gt(&[-1, 0, 0], &[0.0, 1.0, 1.0], &[0.5, 0.5, 0.0])).unwrap();
        assert_eq!(t.mass(2), 0.0);
    }

    #[test]
    fn binary_tree_unchanged() {
        let g = gt(&[-1, 0, 0], &[0.0, 1.0, 2.0], &[0.2, 0.3, 0.5]);
        let t = binarize_tree(&g).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t, TreeMetric::from_binary(&g).unwrap());
    }

    #[test]
    fn single_edge_gets_padding_leaf() {
        let t = binarize_tree(&gt(&[-1, 0], &[0.0, 3.0], &[0.5, 0.5])).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.children(0), Some((1, 2)));
        assert_eq!(t.edge_cost(2), 0.0);
        assert_eq!(t.probs().p(2), 0.0);
        assert_eq!(t.origin(2), 0);
    }

    #[test]
    fn star_distances_preserved() {
        let g = gt(
            &[-1, 0, 0, 0, 0],
            &[0.0, 1.0, 2.0, 3.0, 4.0],
            &[0.0, 0.25, 0.25, 0.25, 0.25],
        );
        let t = binarize_tree(&g).unwrap();
        assert!(t
            .post_order()
            .iter()
            .all(|&u| t.is_leaf(u) || t.children(u).is_some()));
        assert_eq!(t.len(), 5 + 2);
        let d = t.all_pairs();
        for i in 1..5 {
            assert_eq!(d[0][i], i as f64);
            for j in 1..5 {
                if i != j {
                    assert_eq!(d[i][j], (i + j) as f64);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            binarize_tree(&gt(&[1, 0], &[1.0, 1.0], &[0.5, 0.5])),
            Err(Error::CyclicInput(_))
        ));
        assert!(matches!(
            binarize_tree(&gt(&[-1, 2, 1], &[0.0, 1.0, 1.0], &[0.5, 0.25, 0.25])),
            Err(Error::CyclicInput(_))
        ));
        assert!(matches!(
            binarize_tree(&gt(&[-1, -1], &[0.0, 0.0], &[0.5, 0.5])),
            Err(Error::DisconnectedInput(1))
        ));
        assert!(matches!(
            binarize_tree(&gt(&[-1, 0], &[0.0, -1.0], &[0.5, 0.5])),
            Err(Error::NegativeEdgeCost { node: 1, .. })
        ));
        assert!(matches!(
            TreeMetric::from_binary(&gt(&[-1, 0], &[0.0, 1.0], &[0.5, 0.5])),
            Err(Error::NotBinary(0, 1))
        ));
    }
}
