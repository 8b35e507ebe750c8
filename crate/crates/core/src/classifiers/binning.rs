//! Quantised feature columns shared by the tree learners.
//!
//! A feature with at most [`MAX_BINS`] distinct training values gets one bin
//! per value, so splits are exact. Wider features are cut at evenly spaced
//! quantiles of their distinct values.

use ndarray::ArrayView2;

pub const MAX_BINS: usize = 256;

#[derive(Clone, Debug)]
pub struct BinnedMatrix {
    /// `codes[f][i]`: bin of row `i` in feature `f`.
    pub codes: Vec<Vec<u8>>,
    /// `thresholds[f][b]`: rows in bins `0..=b` satisfy `x <= thresholds[f][b]`.
    pub thresholds: Vec<Vec<f64>>,
    pub n_rows: usize,
}

impl BinnedMatrix {
    pub fn new(x: ArrayView2<'_, f64>) -> Self {
        let (n, d) = x.dim();
        let mut codes = Vec::with_capacity(d);
        let mut thresholds = Vec::with_capacity(d);
        for f in 0..d {
            let col = x.column(f);
            let mut distinct: Vec<f64> = col.to_vec();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            let cuts = cut_points(&distinct);
            let feature_codes = col
                .iter()
                .map(|&v| cuts.partition_point(|&t| t < v) as u8)
                .collect();
            codes.push(feature_codes);
            thresholds.push(cuts);
        }
        BinnedMatrix {
            codes,
            thresholds,
            n_rows: n,
        }
    }

    pub fn n_features(&self) -> usize {
        self.codes.len()
    }

    pub fn n_bins(&self, feature: usize) -> usize {
        self.thresholds[feature].len() + 1
    }
}

/// Midpoints between consecutive representative values.
fn cut_points(distinct: &[f64]) -> Vec<f64> {
    if distinct.len() <= 1 {
        return Vec::new();
    }
    let reps: Vec<f64> = if distinct.len() <= MAX_BINS {
        distinct.to_vec()
    } else {
        let last = distinct.len() - 1;
        let mut r: Vec<f64> = (0..MAX_BINS)
            .map(|b| distinct[(b * last) / (MAX_BINS - 1)])
            .collect();
        r.dedup();
        r
    };
    reps.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect()
}
