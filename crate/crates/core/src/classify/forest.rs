//! Random forest of Gini CART trees; the forest score is the fraction of
//! trees voting for the positive class.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TscvError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxFeatures {
    /// `ceil(sqrt(d))` candidate features per split.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => (d as f64).sqrt().ceil() as usize,
            MaxFeatures::All => d,
            MaxFeatures::Count(k) => k,
        }
        .clamp(1, d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub min_samples_split: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 100, max_depth: 8, max_features: MaxFeatures::Sqrt, bootstrap: true, min_samples_split: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf { class: u8 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// One CART tree; nodes live in an arena with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, row: &[f64]) -> u8 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    /// `(feature, threshold)` of the root, if it splits.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split { feature, threshold, .. } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a> {
    rows: &'a [f64],
    dim: usize,
    labels: &'a [u8],
    config: &'a ForestConfig,
    mtry: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl TreeBuilder<'_> {
    fn value(&self, sample: usize, feature: usize) -> f64 {
        self.rows[sample * self.dim + feature]
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let pos = idx.iter().filter(|&&i| self.labels[i] == 1).count();
        let n = idx.len();
        let slot = self.nodes.len();
        let leaf = Node::Leaf { class: u8::from(2 * pos > n) };
        self.nodes.push(leaf.clone());
        if pos == 0 || pos == n || depth >= self.config.max_depth || n < self.config.min_samples_split {
            return slot;
        }
        let Some(best) = self.best_split(idx, pos) else {
            return slot;
        };
        // partition in place: values <= threshold first
        let mut split_at = 0;
        for j in 0..n {
            if self.value(idx[j], best.feature) <= best.threshold {
                idx.swap(j, split_at);
                split_at += 1;
            }
        }
        let (left_idx, right_idx) = idx.split_at_mut(split_at);
        let left = self.build(left_idx, depth + 1);
        let right = self.build(right_idx, depth + 1);
        self.nodes[slot] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        slot
    }

    fn best_split(&mut self, idx: &[usize], total_pos: usize) -> Option<BestSplit> {
        let n = idx.len();
        let features = sample(&mut self.rng, self.dim, self.mtry);
        let mut best: Option<BestSplit> = None;
        let mut pairs: Vec<(f64, u8)> = Vec::with_capacity(n);
        for feature in features {
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (self.value(i, feature), self.labels[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for k in 0..n - 1 {
                left_pos += usize::from(pairs[k].1);
                if pairs[k].0 == pairs[k + 1].0 {
                    continue;
                }
                let left_n = k + 1;
                let right_n = n - left_n;
                let impurity = (left_n as f64 * gini(left_pos, left_n)
                    + right_n as f64 * gini(total_pos - left_pos, right_n))
                    / n as f64;
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let mut threshold = 0.5 * (pairs[k].0 + pairs[k + 1].0);
                    if threshold >= pairs[k + 1].0 {
                        threshold = pairs[k].0;
                    }
                    best = Some(BestSplit { feature, threshold, impurity });
                }
            }
        }
        best
    }
}

pub fn fit_tree(rows: &[f64], dim: usize, labels: &[u8], sample_idx: &mut [usize], config: &ForestConfig, seed: u64) -> DecisionTree {
    let mut builder = TreeBuilder {
        rows,
        dim,
        labels,
        config,
        mtry: config.max_features.resolve(dim),
        rng: ChaCha8Rng::seed_from_u64(seed),
        nodes: Vec::new(),
    };
    builder.build(sample_idx, 0);
    DecisionTree { nodes: builder.nodes }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    dim: usize,
}

impl RandomForest {
    /// `rows` is row-major `labels.len() x dim`.
    pub fn fit(rows: &[f64], dim: usize, labels: &[u8], config: &ForestConfig, seed: u64) -> Result<Self> {
        let n = labels.len();
        if n == 0 || dim == 0 || rows.len() != n * dim {
            return Err(TscvError::Shape(format!(
                "random forest got {} values for {n} samples of {dim} features",
                rows.len()
            )));
        }
        if config.n_trees == 0 {
            return Err(TscvError::Config("random forest needs at least one tree".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trees = (0..config.n_trees)
            .map(|_| {
                let tree_seed: u64 = rng.random();
                let mut idx: Vec<usize> = if config.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                fit_tree(rows, dim, labels, &mut idx, config, tree_seed)
            })
            .collect();
        Ok(Self { trees, dim })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fraction of trees voting for class 1.
    pub fn score(&self, row: &[f64]) -> f64 {
        vote_fraction(self.trees.iter().map(|t| t.predict(row)))
    }
}

pub fn vote_fraction(votes: impl IntoIterator<Item = u8>) -> f64 {
    let (mut pos, mut total) = (0usize, 0usize);
    for v in votes {
        pos += usize::from(v);
        total += 1;
    }
    if total == 0 { 0.0 } else { pos as f64 / total as f64 }
}
