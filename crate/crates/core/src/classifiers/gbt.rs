//! Gradient-boosted regression trees on the softmax log-loss.
//!
//! Each round computes per-class gradients `p_k − y_k` and hessians
//! `p_k (1 − p_k)` of the multinomial log-loss at the current raw scores and
//! fits one depth-limited tree per class. With two classes the softmax is
//! parameterised by a single logit (the class-0 score is pinned at zero), so
//! only one tree per round is needed.

use ndarray::ArrayView2;

use super::binning::BinnedMatrix;
use super::tree::{grow_regression_tree, RegressionTreeParams, Tree};

#[derive(Clone, Debug, PartialEq)]
pub struct GradientBoosting {
    /// `rounds[r][k]`: tree for score `k` in round `r`.
    pub rounds: Vec<Vec<Tree<f64>>>,
    pub n_classes: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct BoostParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub min_child_weight: f64,
}

fn n_scores(n_classes: usize) -> usize {
    if n_classes == 2 {
        1
    } else {
        n_classes
    }
}

fn softmax_into(scores: &[f64], out: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for (o, &s) in out.iter_mut().zip(scores) {
        *o = (s - max).exp();
        z += *o;
    }
    for o in out.iter_mut() {
        *o /= z;
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Mean multinomial log-loss of raw scores (row-major `n × n_scores`).
pub fn log_loss(scores: &[f64], y: &[usize], n_classes: usize) -> f64 {
    let k = n_scores(n_classes);
    let mut total = 0.0;
    let mut p = vec![0.0; n_classes];
    for (i, &label) in y.iter().enumerate() {
        let s = &scores[i * k..(i + 1) * k];
        if k == 1 {
            let q = sigmoid(s[0]).clamp(1e-15, 1.0 - 1e-15);
            total -= if label == 1 { q.ln() } else { (1.0 - q).ln() };
        } else {
            softmax_into(s, &mut p);
            total -= p[label].max(1e-15).ln();
        }
    }
    total / y.len() as f64
}

impl GradientBoosting {
    pub fn fit(x: ArrayView2<'_, f64>, y: &[usize], n_classes: usize, params: BoostParams) -> Self {
        Self::fit_traced(x, y, n_classes, params).0
    }

    /// Fits and also returns the training log-loss after every round.
    pub fn fit_traced(
        x: ArrayView2<'_, f64>,
        y: &[usize],
        n_classes: usize,
        params: BoostParams,
    ) -> (Self, Vec<f64>) {
        let n = x.nrows();
        let k = n_scores(n_classes);
        let bins = BinnedMatrix::new(x);
        let tree_params = RegressionTreeParams {
            max_depth: params.max_depth,
            lambda: params.lambda,
            min_child_weight: params.min_child_weight,
            learning_rate: params.learning_rate,
        };
        let mut scores = vec![0.0; n * k];
        let mut grad = vec![vec![0.0; n]; k];
        let mut hess = vec![vec![0.0; n]; k];
        let mut p = vec![0.0; n_classes];
        let mut rounds = Vec::with_capacity(params.rounds);
        let mut trace = Vec::with_capacity(params.rounds);
        for _ in 0..params.rounds {
            for i in 0..n {
                let s = &scores[i * k..(i + 1) * k];
                if k == 1 {
                    let q = sigmoid(s[0]);
                    grad[0][i] = q - if y[i] == 1 { 1.0 } else { 0.0 };
                    hess[0][i] = (q * (1.0 - q)).max(1e-16);
                } else {
                    softmax_into(s, &mut p);
                    for c in 0..k {
                        grad[c][i] = p[c] - if y[i] == c { 1.0 } else { 0.0 };
                        hess[c][i] = (p[c] * (1.0 - p[c])).max(1e-16);
                    }
                }
            }
            let trees: Vec<Tree<f64>> = (0..k)
                .map(|c| grow_regression_tree(&bins, &grad[c], &hess[c], (0..n).collect(), tree_params))
                .collect();
            for (c, t) in trees.iter().enumerate() {
                for i in 0..n {
                    scores[i * k + c] += t.predict_binned(&bins, i);
                }
            }
            trace.push(log_loss(&scores, y, n_classes));
            rounds.push(trees);
        }
        (GradientBoosting { rounds, n_classes }, trace)
    }

    /// Predictions using only the first `n_rounds` rounds.
    pub fn predict_with(&self, x: ArrayView2<'_, f64>, n_rounds: usize) -> Vec<usize> {
        let k = n_scores(self.n_classes);
        let rounds = &self.rounds[..n_rounds.min(self.rounds.len())];
        x.outer_iter()
            .map(|row| {
                let mut s = vec![0.0; k];
                for trees in rounds {
                    for (c, t) in trees.iter().enumerate() {
                        s[c] += t.predict_row(row);
                    }
                }
                if k == 1 {
                    usize::from(s[0] > 0.0)
                } else {
                    let mut best = 0;
                    for c in 1..k {
                        if s[c] > s[best] {
                            best = c;
                        }
                    }
                    best
                }
            })
            .collect()
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        self.predict_with(x, self.rounds.len())
    }
}
