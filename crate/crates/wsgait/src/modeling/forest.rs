//! Random forest of Gini-split CART trees with bootstrap sampling and
//! sqrt(d) feature subsampling per split.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { p_genuine: f64 },
    Split { feat: usize, thresh: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    fn score(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { p_genuine } => return *p_genuine,
                Node::Split { feat, thresh, left, right } => {
                    at = if row[*feat] <= *thresh { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [bool],
    max_depth: usize,
    mtry: usize,
    nodes: Vec<Node>,
    scratch: Vec<(f64, bool)>,
}

impl<'a> Builder<'a> {
    fn leaf(&mut self, indices: &[usize]) -> usize {
        let genuine = indices.iter().filter(|&&i| self.labels[i]).count();
        self.nodes.push(Node::Leaf { p_genuine: genuine as f64 / indices.len() as f64 });
        self.nodes.len() - 1
    }

    fn build(&mut self, indices: &mut Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let genuine = indices.iter().filter(|&&i| self.labels[i]).count();
        if depth >= self.max_depth || genuine == 0 || genuine == indices.len() || indices.len() < 2 {
            return self.leaf(indices);
        }

        // sample mtry feature candidates without replacement
        let d = self.rows[0].len();
        let mut feats: Vec<usize> = (0..d).collect();
        for i in 0..self.mtry.min(d) {
            let j = rng.random_range(i..d);
            feats.swap(i, j);
        }
        feats.truncate(self.mtry.min(d));

        let parent_n = indices.len() as f64;
        let mut best: Option<(f64, usize, f64)> = None; // (weighted impurity, feat, thresh)
        for &feat in &feats {
            let mut order = std::mem::take(&mut self.scratch);
            order.clear();
            order.extend(indices.iter().map(|&i| (self.rows[i][feat], self.labels[i])));
            order.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let total_g = genuine as f64;
            let total = parent_n;
            let mut left_g = 0.0f64;
            let mut left_n = 0.0f64;
            for w in 0..order.len() - 1 {
                let (v, label) = order[w];
                left_n += 1.0;
                if label {
                    left_g += 1.0;
                }
                let v_next = order[w + 1].0;
                if v == v_next {
                    continue;
                }
                let right_n = total - left_n;
                let right_g = total_g - left_g;
                let gini = |g: f64, n: f64| {
                    let p = g / n;
                    2.0 * p * (1.0 - p)
                };
                let weighted =
                    left_n / total * gini(left_g, left_n) + right_n / total * gini(right_g, right_n);
                if best.map_or(true, |(b, _, _)| weighted < b - 1e-15) {
                    best = Some((weighted, feat, (v + v_next) / 2.0));
                }
            }
            self.scratch = order;
        }

        let parent_p = genuine as f64 / parent_n;
        let parent_gini = 2.0 * parent_p * (1.0 - parent_p);
        let Some((weighted, feat, thresh)) = best else {
            return self.leaf(indices);
        };
        if weighted >= parent_gini - 1e-12 {
            return self.leaf(indices);
        }

        let mut left: Vec<usize> = indices.iter().copied().filter(|&i| self.rows[i][feat] <= thresh).collect();
        let mut right: Vec<usize> = indices.iter().copied().filter(|&i| self.rows[i][feat] > thresh).collect();
        if left.is_empty() || right.is_empty() {
            return self.leaf(indices);
        }
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { p_genuine: 0.0 }); // placeholder
        let l = self.build(&mut left, depth + 1, rng);
        let r = self.build(&mut right, depth + 1, rng);
        self.nodes[at] = Node::Split { feat, thresh, left: l, right: r };
        at
    }
}

impl ForestModel {
    /// `max_depth` 0 means unbounded.
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], n_trees: usize, max_depth: usize, seed: u64) -> ForestModel {
        let n = rows.len();
        let d = rows[0].len();
        let mtry = (d as f64).sqrt().ceil() as usize;
        let depth_cap = if max_depth == 0 { usize::MAX } else { max_depth };
        let mut trees = Vec::with_capacity(n_trees);
        for t in 0..n_trees {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["tree", &t.to_string()]));
            let mut indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut builder = Builder { rows, labels, max_depth: depth_cap, mtry, nodes: Vec::new() };
            builder.build(&mut indices, 0, &mut rng);
            trees.push(Tree { nodes: builder.nodes });
        }
        ForestModel { trees }
    }

    /// Mean leaf genuine-fraction across trees.
    pub fn score(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.score(row)).sum();
        sum / self.trees.len() as f64
    }
}
