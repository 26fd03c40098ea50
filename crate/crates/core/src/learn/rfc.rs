//! Random forest of Gini CART trees with bootstrap rows and √d candidate
//! features per split.

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{argmax, derive_seed};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        class: usize,
    },
    Split {
        /// majority class, used when the tree is truncated here
        class: usize,
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: ArrayView1<f64>) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// The tree a builder limited to `max_depth` would have produced.
    pub fn truncated(&self, max_depth: usize) -> Tree {
        fn copy(src: &Tree, at: usize, depth: usize, max_depth: usize, out: &mut Vec<Node>) -> usize {
            let id = out.len();
            match src.nodes[at] {
                Node::Leaf { class } => out.push(Node::Leaf { class }),
                Node::Split { class, .. } if depth >= max_depth => out.push(Node::Leaf { class }),
                Node::Split {
                    class,
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    out.push(Node::Leaf { class });
                    let l = copy(src, left, depth + 1, max_depth, out);
                    let r = copy(src, right, depth + 1, max_depth, out);
                    out[id] = Node::Split {
                        class,
                        feature,
                        threshold,
                        left: l,
                        right: r,
                    };
                }
            }
            id
        }
        let mut nodes = Vec::new();
        copy(self, 0, 0, max_depth, &mut nodes);
        Tree { nodes }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn class_counts(rows: &[usize], labels: &[usize], n_classes: usize) -> Vec<usize> {
    let mut c = vec![0; n_classes];
    for &r in rows {
        c[labels[r]] += 1;
    }
    c
}

struct Builder<'a, 'b> {
    x: ArrayView2<'a, f64>,
    labels: &'b [usize],
    n_classes: usize,
    max_depth: usize,
    max_features: usize,
    nodes: Vec<Node>,
}

impl Builder<'_, '_> {
    /// Best (feature, threshold, impurity decrease) over the sampled
    /// features; ties keep the first found.
    fn best_split(&self, rows: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        if rows.len() < 2 {
            return None;
        }
        let n = rows.len();
        let parent = class_counts(rows, self.labels, self.n_classes);
        let parent_imp = gini(&parent, n);
        let d = self.x.ncols();
        let mut features = index::sample(rng, d, self.max_features.min(d)).into_vec();
        features.sort_unstable();
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(n);
        for f in features {
            order.clear();
            order.extend(rows.iter().map(|&r| (self.x[[r, f]], self.labels[r])));
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut left = vec![0usize; self.n_classes];
            let mut right = parent.clone();
            for i in 0..n - 1 {
                left[order[i].1] += 1;
                right[order[i].1] -= 1;
                if order[i].0 == order[i + 1].0 {
                    continue;
                }
                let nl = i + 1;
                let nr = n - nl;
                let imp = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
                let gain = parent_imp - imp;
                if gain > 1e-12 && best.map_or(true, |b| gain > b.2) {
                    best = Some((f, 0.5 * (order[i].0 + order[i + 1].0), gain));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }

    /// Each node draws its features from its own stream (tree seed, heap
    /// position), so a split never depends on the depth limit.
    fn build(&mut self, rows: Vec<usize>, depth: usize, tree_seed: u64, pos: u64) -> usize {
        let id = self.nodes.len();
        let counts = class_counts(&rows, self.labels, self.n_classes);
        let class = argmax(counts.iter().map(|&c| c as f64));
        self.nodes.push(Node::Leaf { class });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if depth >= self.max_depth || pure || rows.len() < 2 {
            return id;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(tree_seed, pos));
        let Some((feature, threshold)) = self.best_split(&rows, &mut rng) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| self.x[[i, feature]] <= threshold);
        let left = self.build(l, depth + 1, tree_seed, 2 * pos);
        let right = self.build(r, depth + 1, tree_seed, 2 * pos + 1);
        self.nodes[id] = Node::Split {
            class,
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
    pub n_classes: usize,
}

impl RandomForest {
    pub fn fit(
        x: ArrayView2<f64>,
        labels: &[usize],
        n_classes: usize,
        n_trees: usize,
        max_depth: usize,
        seed: u64,
    ) -> Self {
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let n = x.nrows();
        let max_features = ((x.ncols() as f64).sqrt().floor() as usize).max(1);
        let trees = (0..n_trees)
            .map(|_| {
                let tree_seed: u64 = master.gen();
                let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
                let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                let mut b = Builder {
                    x,
                    labels,
                    n_classes,
                    // heap positions stay exact in u64 up to depth 63
                    max_depth: max_depth.min(63),
                    max_features,
                    nodes: Vec::new(),
                };
                b.build(rows, 0, tree_seed, 1);
                Tree { nodes: b.nodes }
            })
            .collect();
        Self { trees, n_classes }
    }

    /// The first `n_trees` trees cut at `max_depth`; equal to a forest
    /// fitted with those settings and the same seed.
    pub fn truncated(&self, n_trees: usize, max_depth: usize) -> Self {
        Self {
            trees: self.trees.iter().take(n_trees).map(|t| t.truncated(max_depth)).collect(),
            n_classes: self.n_classes,
        }
    }

    pub fn votes(&self, x: ArrayView1<f64>) -> Vec<usize> {
        let mut v = vec![0; self.n_classes];
        for t in &self.trees {
            v[t.predict(x)] += 1;
        }
        v
    }

    pub fn predict(&self, x: ArrayView1<f64>) -> usize {
        argmax(self.votes(x).iter().map(|&c| c as f64))
    }
}
