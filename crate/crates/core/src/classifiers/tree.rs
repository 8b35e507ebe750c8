//! Histogram-based decision trees: Gini classification trees for the random
//! forest and second-order regression trees for gradient boosting.

use ndarray::ArrayView1;
use rand::seq::SliceRandom;

use super::binning::BinnedMatrix;
use crate::rng::HarnessRng;

#[derive(Clone, Debug, PartialEq)]
pub enum Node<T> {
    Leaf(T),
    Split {
        feature: usize,
        /// Rows with bin code `<= bin` (raw value `<= threshold`) go left.
        bin: u8,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree<T> {
    pub nodes: Vec<Node<T>>,
}

impl<T> Tree<T> {
    pub fn predict_row(&self, row: ArrayView1<'_, f64>) -> &T {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict_binned(&self, bins: &BinnedMatrix, i: usize) -> &T {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    bin,
                    left,
                    right,
                    ..
                } => at = if bins.codes[*feature][i] <= *bin { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(t: &Tree<T>, at: usize) -> usize {
            match &t.nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
            }
        }
        walk(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

struct Pending {
    node: usize,
    rows: Vec<usize>,
    depth: usize,
}

fn partition(bins: &BinnedMatrix, rows: Vec<usize>, feature: usize, bin: u8) -> (Vec<usize>, Vec<usize>) {
    rows.into_iter().partition(|&i| bins.codes[feature][i] <= bin)
}

/// Index of the largest count, lowest index on ties.
pub fn argmax_count(counts: &[u32]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

#[derive(Clone, Copy, Debug)]
pub struct ClassTreeParams {
    pub max_depth: Option<usize>,
    /// Non-constant features examined per split.
    pub max_features: usize,
    pub min_samples_split: usize,
}

/// CART with Gini impurity on the rows listed in `rows` (repeats allowed, as
/// produced by bootstrapping). Leaves hold the majority class.
///
/// At each node the features are visited in a fresh random order until
/// `max_features` non-constant ones have been scored; constant features do
/// not count toward the budget.
pub fn grow_classification_tree(
    bins: &BinnedMatrix,
    labels: &[usize],
    n_classes: usize,
    rows: Vec<usize>,
    params: ClassTreeParams,
    rng: &mut HarnessRng,
) -> Tree<usize> {
    let d = bins.n_features();
    let mut nodes: Vec<Node<usize>> = vec![Node::Leaf(0)];
    let mut stack = vec![Pending {
        node: 0,
        rows,
        depth: 0,
    }];
    let mut order: Vec<usize> = (0..d).collect();
    let mut hist: Vec<u32> = Vec::new();

    while let Some(Pending { node, rows, depth }) = stack.pop() {
        let mut counts = vec![0u32; n_classes];
        for &i in &rows {
            counts[labels[i]] += 1;
        }
        let majority = argmax_count(&counts);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = params.max_depth.is_some_and(|m| depth >= m);
        if pure || rows.len() < params.min_samples_split || depth_capped {
            nodes[node] = Node::Leaf(majority);
            continue;
        }

        let n = rows.len() as f64;
        order.shuffle(rng);
        let mut visited = 0;
        // (score, feature, bin); higher score = lower weighted Gini.
        let mut best: Option<(f64, usize, u8)> = None;
        for &f in &order {
            if visited >= params.max_features {
                break;
            }
            let nb = bins.n_bins(f);
            if nb < 2 {
                continue;
            }
            hist.clear();
            hist.resize(nb * n_classes, 0);
            let codes = &bins.codes[f];
            for &i in &rows {
                hist[usize::from(codes[i]) * n_classes + labels[i]] += 1;
            }
            let occupied = (0..nb)
                .filter(|b| hist[b * n_classes..(b + 1) * n_classes].iter().any(|&c| c > 0))
                .count();
            if occupied < 2 {
                continue;
            }
            visited += 1;
            let mut left = vec![0u32; n_classes];
            let mut n_left = 0u32;
            for b in 0..nb - 1 {
                for k in 0..n_classes {
                    let c = hist[b * n_classes + k];
                    left[k] += c;
                    n_left += c;
                }
                let n_right = n - f64::from(n_left);
                if n_left == 0 || n_right <= 0.0 {
                    continue;
                }
                let (mut sl, mut sr) = (0.0, 0.0);
                for k in 0..n_classes {
                    let l = f64::from(left[k]);
                    let r = f64::from(counts[k]) - l;
                    sl += l * l;
                    sr += r * r;
                }
                let score = sl / f64::from(n_left) + sr / n_right;
                if best.is_none_or(|(s, _, _)| score > s) {
                    best = Some((score, f, b as u8));
                }
            }
        }

        match best {
            None => nodes[node] = Node::Leaf(majority),
            Some((_, feature, bin)) => {
                let (l_rows, r_rows) = partition(bins, rows, feature, bin);
                let left = nodes.len();
                nodes.push(Node::Leaf(0));
                let right = nodes.len();
                nodes.push(Node::Leaf(0));
                nodes[node] = Node::Split {
                    feature,
                    bin,
                    threshold: bins.thresholds[feature][usize::from(bin)],
                    left,
                    right,
                };
                stack.push(Pending {
                    node: right,
                    rows: r_rows,
                    depth: depth + 1,
                });
                stack.push(Pending {
                    node: left,
                    rows: l_rows,
                    depth: depth + 1,
                });
            }
        }
    }
    Tree { nodes }
}

#[derive(Clone, Copy, Debug)]
pub struct RegressionTreeParams {
    pub max_depth: usize,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    /// Minimum hessian sum per child.
    pub min_child_weight: f64,
    /// Shrinkage applied to leaf values.
    pub learning_rate: f64,
}

/// Depth-limited tree fitted to gradient/hessian pairs. Split gain is
/// `G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)`; leaves hold
/// `−learning_rate · G/(H+λ)`.
pub fn grow_regression_tree(
    bins: &BinnedMatrix,
    grad: &[f64],
    hess: &[f64],
    rows: Vec<usize>,
    params: RegressionTreeParams,
) -> Tree<f64> {
    let d = bins.n_features();
    let lambda = params.lambda;
    let leaf = |g: f64, h: f64| -params.learning_rate * g / (h + lambda);
    let mut nodes: Vec<Node<f64>> = vec![Node::Leaf(0.0)];
    let mut stack = vec![Pending {
        node: 0,
        rows,
        depth: 0,
    }];
    let mut gh: Vec<(f64, f64)> = Vec::new();

    while let Some(Pending { node, rows, depth }) = stack.pop() {
        let (g_sum, h_sum) = rows
            .iter()
            .fold((0.0, 0.0), |(g, h), &i| (g + grad[i], h + hess[i]));
        if depth >= params.max_depth || rows.len() < 2 {
            nodes[node] = Node::Leaf(leaf(g_sum, h_sum));
            continue;
        }
        let parent = g_sum * g_sum / (h_sum + lambda);
        let mut best: Option<(f64, usize, u8)> = None;
        for f in 0..d {
            let nb = bins.n_bins(f);
            if nb < 2 {
                continue;
            }
            gh.clear();
            gh.resize(nb, (0.0, 0.0));
            let codes = &bins.codes[f];
            for &i in &rows {
                let e = &mut gh[usize::from(codes[i])];
                e.0 += grad[i];
                e.1 += hess[i];
            }
            let (mut gl, mut hl) = (0.0, 0.0);
            for (b, &(g, h)) in gh.iter().enumerate().take(nb - 1) {
                gl += g;
                hl += h;
                let (gr, hr) = (g_sum - gl, h_sum - hl);
                if hl < params.min_child_weight || hr < params.min_child_weight {
                    continue;
                }
                let gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent;
                if gain > 1e-12 && best.is_none_or(|(s, _, _)| gain > s) {
                    best = Some((gain, f, b as u8));
                }
            }
        }
        match best {
            None => nodes[node] = Node::Leaf(leaf(g_sum, h_sum)),
            Some((_, feature, bin)) => {
                let (l_rows, r_rows) = partition(bins, rows, feature, bin);
                let left = nodes.len();
                nodes.push(Node::Leaf(0.0));
                let right = nodes.len();
                nodes.push(Node::Leaf(0.0));
                nodes[node] = Node::Split {
                    feature,
                    bin,
                    threshold: bins.thresholds[feature][usize::from(bin)],
                    left,
                    right,
                };
                stack.push(Pending {
                    node: right,
                    rows: r_rows,
                    depth: depth + 1,
                });
                stack.push(Pending {
                    node: left,
                    rows: l_rows,
                    depth: depth + 1,
                });
            }
        }
    }
    Tree { nodes }
}
