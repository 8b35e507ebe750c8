//! Bagged Gini trees with per-split feature subsampling and majority vote.

use ndarray::ArrayView2;
use rand::Rng;
use rayon::prelude::*;

use super::binning::BinnedMatrix;
use super::tree::{argmax_count, grow_classification_tree, ClassTreeParams, Tree};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Debug, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<Tree<usize>>,
    pub n_classes: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    /// Fraction of features examined per split; at least one.
    pub feature_fraction: Option<f64>,
    pub seed: u64,
}

/// `√d` rounded down, or `fraction · d`, never below one.
pub fn features_per_split(d: usize, fraction: Option<f64>) -> usize {
    let m = match fraction {
        Some(f) => (f * d as f64).floor() as usize,
        None => (d as f64).sqrt().floor() as usize,
    };
    m.clamp(1, d.max(1))
}

impl RandomForest {
    /// Tree `t` draws its bootstrap sample and split features from the stream
    /// seeded with `derive_seed(seed, t)`, so the forest does not depend on
    /// how trees are scheduled across threads.
    pub fn fit(x: ArrayView2<'_, f64>, y: &[usize], n_classes: usize, params: ForestParams) -> Self {
        let n = x.nrows();
        let bins = BinnedMatrix::new(x);
        let tree_params = ClassTreeParams {
            max_depth: params.max_depth,
            max_features: features_per_split(x.ncols(), params.feature_fraction),
            min_samples_split: 2,
        };
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_from_seed(derive_seed(params.seed, t as u64));
                let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                grow_classification_tree(&bins, y, n_classes, sample, tree_params, &mut rng)
            })
            .collect();
        RandomForest { trees, n_classes }
    }

    /// Majority vote of the first `n_trees` trees (ties to the lowest class).
    pub fn predict_with(&self, x: ArrayView2<'_, f64>, n_trees: usize) -> Vec<usize> {
        let trees = &self.trees[..n_trees.min(self.trees.len())];
        x.outer_iter()
            .map(|row| {
                let mut votes = vec![0u32; self.n_classes];
                for t in trees {
                    votes[*t.predict_row(row)] += 1;
                }
                argmax_count(&votes)
            })
            .collect()
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        self.predict_with(x, self.trees.len())
    }
}
