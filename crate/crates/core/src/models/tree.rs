//! CART classification tree with Gini impurity.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Number of non-constant features to evaluate per split; `None` means all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Training samples of class 0 and 1 reaching this leaf.
    Leaf { counts: [u32; 2] },
}

/// Nodes are stored flat; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn leaf_for(&self, row: &[f64]) -> [u32; 2] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
                TreeNode::Leaf { counts } => return *counts,
            }
        }
    }

    /// Fraction of class 1 in the leaf reached by `row`.
    pub fn proba(&self, row: &[f64]) -> f64 {
        let [n0, n1] = self.leaf_for(row);
        n1 as f64 / (n0 + n1) as f64
    }

    /// Structural check for trees read from outside: children come after
    /// their parent, features exist and leaves are nonempty.
    pub fn validate(&self, n_features: usize) -> crate::error::Result<()> {
        let bad = |why: &str| Err(crate::error::Error::Corrupted(format!("decision tree: {why}")));
        if self.nodes.is_empty() {
            return bad("no nodes");
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= n_features || !threshold.is_finite() {
                        return bad("split on a missing feature or non-finite threshold");
                    }
                    if *left <= i || *right <= i || *left >= self.nodes.len() || *right >= self.nodes.len() {
                        return bad("child index out of order");
                    }
                }
                TreeNode::Leaf { counts } if counts[0] + counts[1] == 0 => return bad("empty leaf"),
                TreeNode::Leaf { .. } => {}
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, at: usize) -> usize {
            match &t.nodes[at] {
                TreeNode::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        go(self, 0)
    }
}

struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Best {
    /// Higher score wins (lower weighted Gini); ties go to the lower
    /// feature id, then the lower threshold.
    fn beats(&self, other: &Option<Best>) -> bool {
        match other {
            None => true,
            Some(o) => {
                self.score > o.score
                    || (self.score == o.score && (self.feature, self.threshold) < (o.feature, o.threshold))
            }
        }
    }
}

fn class_counts(y: &[u8], samples: &[usize]) -> [u32; 2] {
    let mut c = [0u32; 2];
    for &s in samples {
        c[y[s] as usize] += 1;
    }
    c
}

fn sum_sq_over_n(c: [u32; 2]) -> f64 {
    let n = (c[0] + c[1]) as f64;
    ((c[0] as f64).powi(2) + (c[1] as f64).powi(2)) / n
}

/// Weighted Gini impurity of a split, for reporting.
pub fn split_gini(left: [u32; 2], right: [u32; 2]) -> f64 {
    let n = (left[0] + left[1] + right[0] + right[1]) as f64;
    (n - sum_sq_over_n(left) - sum_sq_over_n(right)) / n
}

/// Fits one tree on `samples` (row indices into `x`, repeats allowed).
pub fn fit_tree<R: Rng + ?Sized>(
    x: &DenseMatrix,
    y: &[u8],
    samples: Vec<usize>,
    params: &TreeParams,
    rng: &mut R,
) -> DecisionTree {
    let mut nodes = Vec::new();
    let mut builder = Builder {
        x,
        y,
        params,
        feature_pool: (0..x.cols()).collect(),
        scratch: Vec::new(),
    };
    builder.grow(&mut nodes, samples, 0, rng);
    DecisionTree { nodes }
}

struct Builder<'a> {
    x: &'a DenseMatrix,
    y: &'a [u8],
    params: &'a TreeParams,
    feature_pool: Vec<usize>,
    scratch: Vec<(f64, u8)>,
}

impl Builder<'_> {
    fn grow<R: Rng + ?Sized>(
        &mut self,
        nodes: &mut Vec<TreeNode>,
        samples: Vec<usize>,
        depth: usize,
        rng: &mut R,
    ) -> usize {
        let id = nodes.len();
        let counts = class_counts(self.y, &samples);
        nodes.push(TreeNode::Leaf { counts });
        let n = samples.len();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let stop = counts[0] == 0
            || counts[1] == 0
            || n < 2
            || n < 2 * min_leaf
            || self.params.max_depth.is_some_and(|d| depth >= d);
        if stop {
            return id;
        }
        let Some(best) = self.best_split(&samples, counts, rng) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&s| self.x[(s, best.feature)] <= best.threshold);
        let l = self.grow(nodes, left, depth + 1, rng);
        let r = self.grow(nodes, right, depth + 1, rng);
        nodes[id] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        id
    }

    /// Visits features in random order until `max_features` non-constant
    /// ones have been evaluated (or all features are exhausted).
    fn best_split<R: Rng + ?Sized>(&mut self, samples: &[usize], total: [u32; 2], rng: &mut R) -> Option<Best> {
        let d = self.feature_pool.len();
        let want = self.params.max_features.unwrap_or(d).clamp(1, d.max(1));
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<Best> = None;
        let mut evaluated = 0;
        let mut visited = 0;
        while visited < d && evaluated < want {
            // partial Fisher-Yates over the feature pool
            let pick = rng.random_range(visited..d);
            self.feature_pool.swap(visited, pick);
            let f = self.feature_pool[visited];
            visited += 1;

            self.scratch.clear();
            self.scratch
                .extend(samples.iter().map(|&s| (self.x[(s, f)], self.y[s])));
            self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            if self.scratch[0].0 == self.scratch[self.scratch.len() - 1].0 {
                continue;
            }
            evaluated += 1;

            let n = self.scratch.len();
            let mut left = [0u32; 2];
            for i in 0..n - 1 {
                left[self.scratch[i].1 as usize] += 1;
                let (a, b) = (self.scratch[i].0, self.scratch[i + 1].0);
                if a == b || i + 1 < min_leaf || n - i - 1 < min_leaf {
                    continue;
                }
                let right = [total[0] - left[0], total[1] - left[1]];
                let score = sum_sq_over_n(left) + sum_sq_over_n(right);
                let mut threshold = a / 2.0 + b / 2.0;
                if threshold >= b || !threshold.is_finite() {
                    threshold = a;
                }
                let cand = Best {
                    score,
                    feature: f,
                    threshold,
                };
                if cand.beats(&best) {
                    best = Some(cand);
                }
            }
        }
        best
    }
}
