//! Brute-force k-nearest-neighbour voting under Euclidean distance.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::tree::argmax_count;

#[derive(Clone, Debug, PartialEq)]
pub struct Knn {
    train: Array2<f64>,
    labels: Vec<usize>,
    sq_norms: Vec<f64>,
    k: usize,
    n_classes: usize,
}

impl Knn {
    pub fn fit(x: ArrayView2<'_, f64>, y: &[usize], n_classes: usize, k: usize) -> Self {
        let train = x.as_standard_layout().to_owned();
        let sq_norms = train.outer_iter().map(|r| r.dot(&r)).collect();
        Knn {
            train,
            labels: y.to_vec(),
            sq_norms,
            k,
            n_classes,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_train(&self) -> usize {
        self.labels.len()
    }

    /// Squared distances from one query row to every training row, computed
    /// as `‖q‖² + ‖t‖² − 2 q·t` over the query's non-zero entries (one-hot
    /// rows are mostly zeros).
    fn sq_distances(&self, query: &[f64], out: &mut Vec<f64>) {
        let nz: Vec<(usize, f64)> = query
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, &v)| (j, v))
            .collect();
        let q_norm: f64 = nz.iter().map(|(_, v)| v * v).sum();
        let d = self.train.ncols();
        let data = self.train.as_slice().expect("standard layout");
        out.clear();
        out.extend(data.chunks_exact(d.max(1)).zip(&self.sq_norms).map(|(row, &t_norm)| {
            let dot: f64 = nz.iter().map(|&(j, v)| v * row[j]).sum();
            (q_norm + t_norm - 2.0 * dot).max(0.0)
        }));
        if d == 0 {
            out.resize(self.labels.len(), 0.0);
        }
    }

    fn predict_one(&self, query: &[f64], dist: &mut Vec<f64>, idx: &mut Vec<usize>) -> usize {
        self.sq_distances(query, dist);
        let k = self.k.min(self.labels.len());
        idx.clear();
        idx.extend(0..self.labels.len());
        // Nearest first; equal distances resolved by training position.
        let cmp = |a: &usize, b: &usize| dist[*a].total_cmp(&dist[*b]).then(a.cmp(b));
        if k < idx.len() {
            idx.select_nth_unstable_by(k - 1, cmp);
        }
        let mut votes = vec![0u32; self.n_classes];
        for &i in &idx[..k] {
            votes[self.labels[i]] += 1;
        }
        argmax_count(&votes)
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        let x = x.as_standard_layout();
        let d = x.ncols();
        let rows: Vec<&[f64]> = if d == 0 {
            vec![&[][..]; x.nrows()]
        } else {
            x.as_slice().expect("standard layout").chunks_exact(d).collect()
        };
        rows.par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(dist, idx), row| self.predict_one(row, dist, idx),
            )
            .collect()
    }
}
