//! One-vs-rest linear SVMs trained by stochastic subgradient descent.
//!
//! Each binary problem minimises `λ/2 ‖w‖² + (1/n) Σ max(0, 1 − y_i w·x_i)`
//! with `λ = 1/(C n)` using the Pegasos schedule: step `1/(λ t)` on one
//! example at a time, followed by projection onto the ball of radius
//! `1/√λ`. The bias is an extra constant-one feature.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;

use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSvm {
    /// One row per class: feature weights followed by the bias.
    pub weights: Array2<f64>,
}

/// Primal objective for labels in {−1, +1}.
pub fn objective(w: ArrayView1<'_, f64>, x: ArrayView2<'_, f64>, y: &[f64], lambda: f64) -> f64 {
    let d = x.ncols();
    let hinge: f64 = x
        .outer_iter()
        .zip(y)
        .map(|(row, &yi)| (1.0 - yi * (row.dot(&w.slice(ndarray::s![..d])) + w[d])).max(0.0))
        .sum();
    0.5 * lambda * w.dot(&w) + hinge / y.len() as f64
}

/// Trains one binary problem; returns the weights and the objective after
/// every epoch.
pub fn train_binary(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    c: f64,
    epochs: usize,
    seed: u64,
) -> (Array1<f64>, Vec<f64>) {
    let (n, d) = x.dim();
    let lambda = 1.0 / (c * n as f64);
    let radius = 1.0 / lambda.sqrt();
    let mut w = Array1::<f64>::zeros(d + 1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(epochs);
    let mut t = 0u64;
    for epoch in 0..epochs {
        order.shuffle(&mut rng_from_seed(derive_seed(seed, epoch as u64)));
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = x.row(i);
            let margin = y[i] * (row.dot(&w.slice(ndarray::s![..d])) + w[d]);
            w *= 1.0 - eta * lambda;
            if margin < 1.0 {
                let step = eta * y[i];
                w.slice_mut(ndarray::s![..d]).scaled_add(step, &row);
                w[d] += step;
            }
            let norm = w.dot(&w).sqrt();
            if norm > radius {
                w *= radius / norm;
            }
        }
        history.push(objective(w.view(), x, y, lambda));
    }
    (w, history)
}

impl LinearSvm {
    pub fn fit(x: ArrayView2<'_, f64>, labels: &[usize], n_classes: usize, c: f64, epochs: usize, seed: u64) -> Self {
        let d = x.ncols();
        let mut weights = Array2::zeros((n_classes, d + 1));
        for class in 0..n_classes {
            let y: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            let (w, _) = train_binary(x, &y, c, epochs, derive_seed(seed, class as u64));
            weights.row_mut(class).assign(&w);
        }
        LinearSvm { weights }
    }

    pub fn decision(&self, row: ArrayView1<'_, f64>) -> Vec<f64> {
        let d = row.len();
        self.weights
            .outer_iter()
            .map(|w| row.dot(&w.slice(ndarray::s![..d])) + w[d])
            .collect()
    }

    /// Class with the highest decision value, lowest index on ties.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        x.outer_iter()
            .map(|row| {
                let scores = self.decision(row);
                let mut best = 0;
                for (k, &s) in scores.iter().enumerate() {
                    if s > scores[best] {
                        best = k;
                    }
                }
                best
            })
            .collect()
    }
}
