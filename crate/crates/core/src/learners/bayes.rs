//! Naive-structure discrete Bayes network over equal-frequency bins.
//!
//! The class node is the only parent of every feature node. Numeric features
//! are discretized with cut points learned from the training rows only, and
//! every conditional probability table is smoothed with a pseudo-count.

use serde::{Deserialize, Serialize};

use super::{LearnError, TrainView};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesParams {
    pub bins: usize,
    pub alpha: f64,
}

impl Default for BayesParams {
    fn default() -> Self {
        Self { bins: 10, alpha: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub alpha: f64,
    /// Ascending cut points per feature; `edges.len() + 1` effective bins.
    pub bin_edges: Vec<Vec<f64>>,
    pub priors: Vec<f64>,
    /// `tables[feature][class][bin]`.
    pub tables: Vec<Vec<Vec<f64>>>,
}

/// Equal-frequency cut points for one feature.
///
/// The sorted values are split into `bins` groups at positions
/// `floor(j * n / bins)`; each cut sits midway between the neighboring order
/// statistics. Cuts that fall between equal values are dropped and
/// duplicates collapse, so fewer bins may result.
pub fn discretize_fit(values: &[f64], bins: usize) -> Result<Vec<f64>, LearnError> {
    if bins < 2 {
        return Err(LearnError::InvalidParam(format!("bins must be at least 2, got {bins}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = Vec::with_capacity(bins - 1);
    for j in 1..bins {
        let k = j * n / bins;
        if k == 0 || k >= n {
            continue;
        }
        let (lo, hi) = (sorted[k - 1], sorted[k]);
        if lo == hi {
            continue;
        }
        let edge = lo + (hi - lo) / 2.0;
        if edges.last().is_none_or(|&last| edge > last) {
            edges.push(edge);
        }
    }
    Ok(edges)
}

/// Bin of `value`: the number of edges strictly below it. Values past either
/// end land in the first or last bin.
pub fn discretize_apply(edges: &[f64], value: f64) -> usize {
    edges.partition_point(|&e| e < value)
}

impl NaiveBayesModel {
    pub fn num_features(&self) -> usize {
        self.bin_edges.len()
    }

    pub fn num_classes(&self) -> usize {
        self.priors.len()
    }

    /// Normalized posterior, accumulated in log space.
    pub fn predict_dist(&self, x: &[f64]) -> Vec<f64> {
        let mut log_post: Vec<f64> = self.priors.iter().map(|p| p.ln()).collect();
        for (f, &v) in x.iter().enumerate() {
            let bin = discretize_apply(&self.bin_edges[f], v);
            for (c, lp) in log_post.iter_mut().enumerate() {
                *lp += self.tables[f][c][bin].ln();
            }
        }
        let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut post: Vec<f64> = log_post.iter().map(|lp| (lp - max).exp()).collect();
        let total: f64 = post.iter().sum();
        post.iter_mut().for_each(|p| *p /= total);
        post
    }
}

/// Priors `(n_c + alpha) / (n + alpha * |C|)`; conditionals
/// `(count + alpha) / (n_c + alpha * B_f)` with `B_f` the effective bin count
/// of feature `f`.
pub fn fit_naive_bayes(view: &TrainView<'_>, params: &BayesParams) -> Result<NaiveBayesModel, LearnError> {
    if view.rows.is_empty() {
        return Err(LearnError::EmptyTraining);
    }
    if !(params.alpha > 0.0 && params.alpha.is_finite()) {
        return Err(LearnError::InvalidParam(format!("alpha must be positive, got {}", params.alpha)));
    }
    let ds = view.ds;
    let k = ds.num_classes();
    let n = view.rows.len() as f64;
    let class_counts = view.class_counts();
    let alpha = params.alpha;
    let priors = class_counts
        .iter()
        .map(|&c| (c as f64 + alpha) / (n + alpha * k as f64))
        .collect();

    let mut bin_edges = Vec::with_capacity(ds.num_features());
    let mut tables = Vec::with_capacity(ds.num_features());
    for f in 0..ds.num_features() {
        let values: Vec<f64> = view.rows.iter().map(|&r| ds.row(r)[f]).collect();
        let edges = discretize_fit(&values, params.bins)?;
        let nbins = edges.len() + 1;
        let mut counts = vec![vec![0u64; nbins]; k];
        for (&r, &v) in view.rows.iter().zip(&values) {
            counts[ds.label(r)][discretize_apply(&edges, v)] += 1;
        }
        let table = counts
            .iter()
            .zip(&class_counts)
            .map(|(row, &nc)| {
                let denom = nc as f64 + alpha * nbins as f64;
                row.iter().map(|&c| (c as f64 + alpha) / denom).collect()
            })
            .collect();
        bin_edges.push(edges);
        tables.push(table);
    }
    Ok(NaiveBayesModel { alpha, bin_edges, priors, tables })
}
