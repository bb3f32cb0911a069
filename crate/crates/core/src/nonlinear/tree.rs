//! Axis-aligned decision trees and a weighted-Gini CART trainer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ClassId;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf { label: ClassId },
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Arena-backed binary tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TreeJson", try_from = "TreeJson")]
pub struct DecisionTree {
    dim: usize,
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf(dim: usize, label: ClassId) -> Self {
        DecisionTree { dim, nodes: vec![Node::Leaf { label }] }
    }

    /// Builds a tree from an arena, checking that every split is well formed.
    pub fn from_nodes(dim: usize, nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() || dim == 0 {
            return Err(Error::invalid("tree needs a root and dimension >= 1"));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            if let Node::Split { feature, threshold, left, right } = *node {
                if feature >= dim || !threshold.is_finite() {
                    return Err(Error::invalid(format!("node {i} has an invalid split")));
                }
                for child in [left, right] {
                    if child >= nodes.len() || child == 0 {
                        return Err(Error::invalid(format!("node {i} has a dangling child")));
                    }
                    parents[child] += 1;
                }
            }
        }
        if parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::invalid("every non-root node needs exactly one parent"));
        }
        Ok(DecisionTree { dim, nodes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> ClassId {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { label } => label,
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Copy of the tree with leaf `leaf` relabelled.
    pub fn with_leaf_label(&self, leaf: usize, label: ClassId) -> Self {
        let mut t = self.clone();
        if let Node::Leaf { label: l } = &mut t.nodes[leaf] {
            *l = label;
        }
        t
    }

    /// Sorted distinct leaf labels.
    pub fn classes(&self) -> Vec<ClassId> {
        let mut c: Vec<ClassId> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { label } => Some(*label),
                _ => None,
            })
            .collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &DecisionTree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }
}

/// Nested JSON form: `{"dim": d, "root": {"feature", "threshold", "left", "right"} | {"label"}}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeJson {
    dim: usize,
    root: NodeJson,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeJson {
    Leaf { label: ClassId },
    Split { feature: usize, threshold: f64, left: Box<NodeJson>, right: Box<NodeJson> },
}

impl From<DecisionTree> for TreeJson {
    fn from(t: DecisionTree) -> Self {
        fn build(t: &DecisionTree, at: usize) -> NodeJson {
            match t.nodes[at] {
                Node::Leaf { label } => NodeJson::Leaf { label },
                Node::Split { feature, threshold, left, right } => NodeJson::Split {
                    feature,
                    threshold,
                    left: Box::new(build(t, left)),
                    right: Box::new(build(t, right)),
                },
            }
        }
        TreeJson { dim: t.dim, root: build(&t, 0) }
    }
}

impl TryFrom<TreeJson> for DecisionTree {
    type Error = Error;

    fn try_from(j: TreeJson) -> Result<Self> {
        fn push(nodes: &mut Vec<Node>, n: NodeJson) -> usize {
            let at = nodes.len();
            match n {
                NodeJson::Leaf { label } => nodes.push(Node::Leaf { label }),
                NodeJson::Split { feature, threshold, left, right } => {
                    nodes.push(Node::Leaf { label: 0 });
                    let l = push(nodes, *left);
                    let r = push(nodes, *right);
                    nodes[at] = Node::Split { feature, threshold, left: l, right: r };
                }
            }
            at
        }
        let mut nodes = Vec::new();
        push(&mut nodes, j.root);
        DecisionTree::from_nodes(j.dim, nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Minimum number of training rows in each leaf.
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: 10, min_leaf: 1 }
    }
}

struct Trainer<'a> {
    xs: &'a [Vec<f64>],
    class_of: Vec<usize>,
    classes: Vec<ClassId>,
    weights: &'a [f64],
    params: TreeParams,
    nodes: Vec<Node>,
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

impl Trainer<'_> {
    fn totals(&self, idx: &[usize]) -> Vec<f64> {
        let mut t = vec![0.0; self.classes.len()];
        for &i in idx {
            t[self.class_of[i]] += self.weights[i];
        }
        t
    }

    /// Weighted majority, ties to the lowest class id.
    fn majority(&self, totals: &[f64]) -> ClassId {
        let mut best = 0;
        for c in 1..totals.len() {
            if totals[c] > totals[best] {
                best = c;
            }
        }
        self.classes[best]
    }

    /// Best `(feature, threshold, impurity)` by weighted Gini; first found wins ties.
    fn best_split(&self, idx: &[usize], totals: &[f64]) -> Option<(usize, f64, f64)> {
        let total: f64 = totals.iter().sum();
        let d = self.xs[idx[0]].len();
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..d {
            order.sort_by(|&a, &b| self.xs[a][f].total_cmp(&self.xs[b][f]).then(a.cmp(&b)));
            let mut left = vec![0.0; totals.len()];
            let mut left_w = 0.0;
            for pos in 0..order.len() - 1 {
                let i = order[pos];
                left[self.class_of[i]] += self.weights[i];
                left_w += self.weights[i];
                let (v, next) = (self.xs[i][f], self.xs[order[pos + 1]][f]);
                if v == next {
                    continue;
                }
                let n_left = pos + 1;
                if n_left < self.params.min_leaf || order.len() - n_left < self.params.min_leaf {
                    continue;
                }
                let right: Vec<f64> = totals.iter().zip(&left).map(|(t, l)| t - l).collect();
                let right_w = total - left_w;
                let score = (left_w * gini(&left, left_w) + right_w * gini(&right, right_w)) / total;
                if best.is_none_or(|(_, _, s)| score < s - 1e-15) {
                    best = Some((f, 0.5 * (v + next), score));
                }
            }
        }
        best
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let totals = self.totals(&idx);
        let total: f64 = totals.iter().sum();
        let at = self.nodes.len();
        let label = self.majority(&totals);
        self.nodes.push(Node::Leaf { label });
        let pure = totals.iter().filter(|&&t| t > 0.0).count() <= 1;
        if depth >= self.params.max_depth || pure || idx.len() < 2 * self.params.min_leaf.max(1) {
            return at;
        }
        let parent = gini(&totals, total);
        let Some((feature, threshold, score)) = self.best_split(&idx, &totals) else {
            return at;
        };
        if score >= parent - 1e-12 {
            return at;
        }
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.xs[i][feature] <= threshold);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[at] = Node::Split { feature, threshold, left, right };
        at
    }
}

/// Greedy CART with example weights (typically `1/p` importance weights).
/// Deterministic given the input order.
pub fn dt_train_weighted(
    xs: &[Vec<f64>],
    ys: &[ClassId],
    weights: &[f64],
    params: &TreeParams,
) -> Result<DecisionTree> {
    if xs.is_empty() || xs.len() != ys.len() || xs.len() != weights.len() {
        return Err(Error::invalid("training set must be nonempty with matching labels and weights"));
    }
    let d = xs[0].len();
    if d == 0 || xs.iter().any(|x| x.len() != d) {
        return Err(Error::invalid("training rows must share a dimension >= 1"));
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::invalid("example weights must be positive and finite"));
    }
    let mut classes = ys.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let class_of = ys.iter().map(|y| classes.binary_search(y).unwrap()).collect();
    let mut trainer = Trainer { xs, class_of, classes, weights, params: *params, nodes: Vec::new() };
    trainer.build((0..xs.len()).collect(), 0);
    Ok(DecisionTree { dim: d, nodes: trainer.nodes })
}
