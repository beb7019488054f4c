//! Bootstrap-aggregated trees and random forests.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::prng::{bootstrap_sample, Prng};
use super::tree::{fit_tree, MaxFeatures, TreeModel, TreeParams};
use super::{mean_distribution, LearnError, TrainView};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaggingParams {
    pub iterations: usize,
    pub base: TreeParams,
}

impl Default for BaggingParams {
    fn default() -> Self {
        Self { iterations: 10, base: TreeParams::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    /// Features tried per node; `None` means `floor(sqrt(d))`.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    /// When false every tree sees the training rows as given instead of a
    /// bootstrap replicate. Only useful for testing.
    #[serde(default = "default_true")]
    pub bootstrap: bool,
}

fn default_true() -> bool {
    true
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { trees: 100, mtry: None, min_leaf: 1, bootstrap: true }
    }
}

/// `floor(sqrt(d))`, at least 1.
pub fn default_mtry(d: usize) -> usize {
    let mut m = (d as f64).sqrt() as usize;
    // Guard against rounding in the float square root.
    while (m + 1) * (m + 1) <= d {
        m += 1;
    }
    while m * m > d {
        m -= 1;
    }
    m.max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaggingModel {
    pub seed: u64,
    pub members: Vec<TreeModel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub seed: u64,
    pub mtry: usize,
    pub members: Vec<TreeModel>,
}

macro_rules! tree_ensemble {
    ($ty:ty) => {
        impl $ty {
            pub fn num_features(&self) -> usize {
                self.members[0].num_features()
            }

            pub fn num_classes(&self) -> usize {
                self.members[0].num_classes()
            }

            /// Mean of the members' leaf distributions.
            pub fn predict_dist(&self, x: &[f64]) -> Vec<f64> {
                mean_distribution(self.members.iter().map(|t| t.predict_dist(x)), self.num_classes())
            }
        }
    };
}

tree_ensemble!(BaggingModel);
tree_ensemble!(ForestModel);

/// Bagging: member `i` is a tree grown on `bootstrap_sample(n)` drawn from
/// stream `("bag", i)`.
pub fn fit_bagging(view: &TrainView<'_>, params: &BaggingParams, seed: u64) -> Result<BaggingModel, LearnError> {
    if params.iterations == 0 {
        return Err(LearnError::InvalidParam("bagging needs at least one iteration".into()));
    }
    if view.rows.is_empty() {
        return Err(LearnError::EmptyTraining);
    }
    let members = (0..params.iterations)
        .into_par_iter()
        .map(|i| {
            let mut rng = Prng::stream(seed, "bag", i as u64);
            let rows = resample(view.rows, &mut rng);
            fit_tree(&TrainView::new(view.ds, &rows), &params.base, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BaggingModel { seed, members })
}

/// Random forest: member `i` is grown on a bootstrap replicate from stream
/// `("rf-boot", i)`, choosing `mtry` candidate features per node from stream
/// `("rf-node", i)`.
pub fn fit_forest(view: &TrainView<'_>, params: &ForestParams, seed: u64) -> Result<ForestModel, LearnError> {
    if params.trees == 0 {
        return Err(LearnError::InvalidParam("forest needs at least one tree".into()));
    }
    if view.rows.is_empty() {
        return Err(LearnError::EmptyTraining);
    }
    let d = view.ds.num_features();
    let mtry = params.mtry.unwrap_or_else(|| default_mtry(d));
    if mtry == 0 || mtry > d {
        return Err(LearnError::InvalidParam(format!("mtry must be in 1..={d}, got {mtry}")));
    }
    let tree_params = TreeParams { max_features: MaxFeatures::Count(mtry), min_leaf: params.min_leaf };
    let members = (0..params.trees)
        .into_par_iter()
        .map(|i| {
            let rows = if params.bootstrap {
                resample(view.rows, &mut Prng::stream(seed, "rf-boot", i as u64))
            } else {
                view.rows.to_vec()
            };
            let mut node_rng = Prng::stream(seed, "rf-node", i as u64);
            fit_tree(&TrainView::new(view.ds, &rows), &tree_params, &mut node_rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ForestModel { seed, mtry, members })
}

fn resample(rows: &[usize], rng: &mut Prng) -> Vec<usize> {
    bootstrap_sample(rows.len(), rng).into_iter().map(|j| rows[j]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{Attribute, Dataset};

    fn blobs(n_per_class: usize) -> Dataset {
        let attrs = (0..4).map(|i| Attribute::numeric(format!("f{i}"))).collect();
        let class = Attribute::nominal("class", ["a", "b", "c"]).unwrap();
        let mut ds = Dataset::new("blobs", attrs, class).unwrap();
        let mut rng = Prng::from_state(11);
        for c in 0..3 {
            for _ in 0..n_per_class {
                let row = (0..4).map(|f| (c * (f + 1)) as f64 + rng.uniform(-1.5, 1.5)).collect();
                ds.push(row, c).unwrap();
            }
        }
        ds
    }

    fn all_rows(ds: &Dataset) -> Vec<usize> {
        (0..ds.len()).collect()
    }

    #[test]
    fn mtry_defaults() {
        assert_eq!(default_mtry(11), 3);
        assert_eq!(default_mtry(1), 1);
        assert_eq!(default_mtry(16), 4);
        assert_eq!(default_mtry(15), 3);
    }

    #[test]
    fn single_bag_is_tree_on_its_replicate() {
        let ds = blobs(10);
        let rows = all_rows(&ds);
        let view = TrainView::new(&ds, &rows);
        let params = BaggingParams { iterations: 1, ..BaggingParams::default() };
        let bag = fit_bagging(&view, &params, 7).unwrap();

        let mut rng = Prng::stream(7, "bag", 0);
        let replicate: Vec<usize> = bootstrap_sample(rows.len(), &mut rng);
        let tree = fit_tree(&TrainView::new(&ds, &replicate), &TreeParams::default(), &mut rng).unwrap();
        assert_eq!(bag.members, vec![tree.clone()]);
        for i in 0..ds.len() {
            assert_eq!(bag.predict_dist(ds.row(i)), tree.predict_dist(ds.row(i)));
        }
    }

    #[test]
    fn forest_reduces_to_tree() {
        let ds = blobs(8);
        let rows = all_rows(&ds);
        let view = TrainView::new(&ds, &rows);
        let params = ForestParams { trees: 1, mtry: Some(4), min_leaf: 1, bootstrap: false };
        let forest = fit_forest(&view, &params, 3).unwrap();
        let tree = fit_tree(&view, &TreeParams::default(), &mut Prng::from_state(0)).unwrap();
        assert_eq!(forest.members, vec![tree]);
    }

    #[test]
    fn averaging_of_member_outputs() {
        let dists: [&[f64]; 3] = [&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]];
        let mean = mean_distribution(dists.into_iter(), 2);
        assert!((mean[0] - 2.0 / 3.0).abs() < 1e-15 && (mean[1] - 1.0 / 3.0).abs() < 1e-15);
        let pair: [&[f64]; 2] = [&[0.6, 0.4], &[0.2, 0.8]];
        let mean = mean_distribution(pair.into_iter(), 2);
        assert!((mean[0] - 0.4).abs() < 1e-15 && (mean[1] - 0.6).abs() < 1e-15);
        assert_eq!(super::super::argmax(&mean), 1);
    }

    #[test]
    fn members_are_independent_of_ensemble_size() {
        let ds = blobs(10);
        let rows = all_rows(&ds);
        let view = TrainView::new(&ds, &rows);
        let small = fit_forest(&view, &ForestParams { trees: 3, ..ForestParams::default() }, 5).unwrap();
        let large = fit_forest(&view, &ForestParams { trees: 9, ..ForestParams::default() }, 5).unwrap();
        assert_eq!(small.members[..], large.members[..3]);
        assert_eq!(small.mtry, 2);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let ds = blobs(15);
        let rows = all_rows(&ds);
        let view = TrainView::new(&ds, &rows);
        let params = ForestParams { trees: 20, ..ForestParams::default() };
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = single.install(|| fit_forest(&view, &params, 99).unwrap());
        let b = fit_forest(&view, &params, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_sizes() {
        let ds = blobs(2);
        let rows = all_rows(&ds);
        let view = TrainView::new(&ds, &rows);
        assert!(fit_bagging(&view, &BaggingParams { iterations: 0, ..Default::default() }, 0).is_err());
        assert!(fit_forest(&view, &ForestParams { trees: 0, ..Default::default() }, 0).is_err());
        assert!(fit_forest(&view, &ForestParams { mtry: Some(5), ..Default::default() }, 0).is_err());
    }
}
