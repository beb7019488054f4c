//! CART classification trees with Gini impurity.

use serde::{Deserialize, Serialize};

use super::prng::Prng;
use super::{LearnError, TrainView};

/// How many features each node considers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    #[default]
    All,
    Count(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_features: MaxFeatures,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_features: MaxFeatures::All, min_leaf: 1 }
    }
}

/// A tree node. Nodes are stored in preorder: a split's left child follows
/// it directly and `right` is the index of its right child.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split { feature: usize, threshold: f64, right: usize },
    Leaf { counts: Vec<u64>, distribution: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    num_features: usize,
    num_classes: usize,
    nodes: Vec<Node>,
}

impl TreeModel {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { right, .. } => 1 + walk(nodes, i + 1).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// The leaf distribution reached by `x` (`value <= threshold` goes left).
    pub fn predict_dist(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { distribution, .. } => return distribution,
                Node::Split { feature, threshold, right } => {
                    i = if x[*feature] <= *threshold { i + 1 } else { *right };
                }
            }
        }
    }

    /// Rejects structurally invalid trees (e.g. from a hand-edited model file).
    pub(crate) fn validate(&self) -> Result<(), String> {
        fn check(t: &TreeModel, i: usize, depth: usize) -> Result<usize, String> {
            if depth > t.nodes.len() {
                return Err("tree has a cycle".into());
            }
            match t.nodes.get(i) {
                None => Err(format!("node index {i} out of range")),
                Some(Node::Leaf { counts, distribution }) => {
                    if counts.len() != t.num_classes || distribution.len() != t.num_classes {
                        return Err(format!("leaf {i} has the wrong class count"));
                    }
                    Ok(i + 1)
                }
                Some(Node::Split { feature, right, .. }) => {
                    if *feature >= t.num_features {
                        return Err(format!("split {i} uses feature {feature} out of range"));
                    }
                    let end = check(t, i + 1, depth + 1)?;
                    if end != *right {
                        return Err(format!("split {i} has right child {right}, expected {end}"));
                    }
                    check(t, *right, depth + 1)
                }
            }
        }
        if check(self, 0, 0)? != self.nodes.len() {
            return Err("tree has unreachable nodes".into());
        }
        Ok(())
    }
}

/// `a/b > c/d` for nonnegative integers whose cross products fit in u128.
fn ratio_gt(a: u128, b: u128, c: u128, d: u128) -> bool {
    a * d > c * b
}

/// Sum of squared class counts.
fn square_sum(counts: &[u64]) -> u128 {
    counts.iter().map(|&c| u128::from(c) * u128::from(c)).sum()
}

/// A candidate split, scored by the children's Gini "purity"
/// `sum(cL^2)/nL + sum(cR^2)/nR`, kept as an exact fraction. Maximizing it
/// maximizes the impurity decrease.
#[derive(Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    num: u128,
    den: u128,
}

struct Task {
    rows: Vec<usize>,
    /// Index of the split whose right child this task becomes.
    patch: Option<usize>,
}

/// Fits a CART tree on the rows of `view`.
///
/// A node stays a leaf when it is pure, has fewer than `2 * min_leaf` rows,
/// or none of its candidate features admits a split. Otherwise the split with
/// the largest Gini decrease wins (a zero decrease is accepted), ties going
/// to the lower feature index and then the lower threshold. Candidate
/// thresholds are midpoints between consecutive distinct sorted values.
/// Features are subsampled per node from `rng` when `max_features` is below
/// the feature count; `rng` is then consumed in preorder.
pub fn fit_tree(view: &TrainView<'_>, params: &TreeParams, rng: &mut Prng) -> Result<TreeModel, LearnError> {
    if view.rows.is_empty() {
        return Err(LearnError::EmptyTraining);
    }
    if params.min_leaf == 0 {
        return Err(LearnError::InvalidParam("min_leaf must be at least 1".into()));
    }
    let d = view.ds.num_features();
    let k = view.ds.num_classes();
    let subset = match params.max_features {
        MaxFeatures::All => None,
        MaxFeatures::Count(m) if m == 0 || m > d => {
            return Err(LearnError::InvalidParam(format!(
                "max_features must be in 1..={d}, got {m}"
            )))
        }
        MaxFeatures::Count(m) if m == d => None,
        MaxFeatures::Count(m) => Some(m),
    };
    assert!(view.rows.len() < 1 << 20, "training set too large for exact split scoring");

    let mut nodes = Vec::new();
    let mut stack = vec![Task { rows: view.rows.to_vec(), patch: None }];
    let mut order: Vec<usize> = Vec::new();
    while let Some(Task { rows, patch }) = stack.pop() {
        let here = nodes.len();
        if let Some(split) = patch {
            if let Node::Split { right, .. } = &mut nodes[split] {
                *right = here;
            }
        }
        let mut counts = vec![0u64; k];
        for &r in &rows {
            counts[view.ds.label(r)] += 1;
        }
        let n = rows.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let best = if pure || n < 2 * params.min_leaf {
            None
        } else {
            let features: Vec<usize> = match subset {
                None => (0..d).collect(),
                Some(m) => {
                    let mut f = rng.sample_without_replacement(d, m);
                    f.sort_unstable();
                    f
                }
            };
            best_split(view, &rows, &counts, &features, params.min_leaf, &mut order)
        };
        match best {
            None => {
                let distribution = counts.iter().map(|&c| c as f64 / n as f64).collect();
                nodes.push(Node::Leaf { counts, distribution });
            }
            Some(c) => {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&r| view.ds.row(r)[c.feature] <= c.threshold);
                nodes.push(Node::Split { feature: c.feature, threshold: c.threshold, right: 0 });
                stack.push(Task { rows: right, patch: Some(here) });
                stack.push(Task { rows: left, patch: None });
            }
        }
    }
    Ok(TreeModel { num_features: d, num_classes: k, nodes })
}

fn best_split(
    view: &TrainView<'_>,
    rows: &[usize],
    counts: &[u64],
    features: &[usize],
    min_leaf: usize,
    order: &mut Vec<usize>,
) -> Option<Candidate> {
    let n = rows.len();
    let mut best: Option<Candidate> = None;
    let mut left = vec![0u64; counts.len()];
    let mut right = vec![0u64; counts.len()];
    for &f in features {
        order.clear();
        order.extend_from_slice(rows);
        let value = |r: usize| view.ds.row(r)[f];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)));

        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(counts);
        for pos in 0..n - 1 {
            let label = view.ds.label(order[pos]);
            left[label] += 1;
            right[label] -= 1;
            let (lo, hi) = (value(order[pos]), value(order[pos + 1]));
            let n_left = pos + 1;
            if lo == hi || n_left < min_leaf || n - n_left < min_leaf {
                continue;
            }
            let (nl, nr) = (n_left as u128, (n - n_left) as u128);
            let num = square_sum(&left) * nr + square_sum(&right) * nl;
            let den = nl * nr;
            if best.is_none_or(|b| ratio_gt(num, den, b.num, b.den)) {
                best = Some(Candidate { feature: f, threshold: midpoint(lo, hi), num, den });
            }
        }
    }
    best
}

/// Midpoint of `lo < hi` that still separates them.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi && mid >= lo {
        mid
    } else {
        lo
    }
}

/// Gini impurity decrease of splitting `parent` into `left` and `right`,
/// weighted by child size.
pub fn gini_gain(parent: &[u64], left: &[u64], right: &[u64]) -> f64 {
    fn gini(c: &[u64]) -> (f64, f64) {
        let n: u64 = c.iter().sum();
        if n == 0 {
            return (0.0, 0.0);
        }
        let nf = n as f64;
        (1.0 - c.iter().map(|&x| (x as f64 / nf).powi(2)).sum::<f64>(), nf)
    }
    let (gp, np) = gini(parent);
    let (gl, nl) = gini(left);
    let (gr, nr) = gini(right);
    gp - (nl / np) * gl - (nr / np) * gr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{Attribute, Dataset};

    pub(crate) fn toy(rows: &[(&[f64], usize)], classes: usize) -> Dataset {
        let d = rows[0].0.len();
        let attrs = (0..d).map(|i| Attribute::numeric(format!("f{i}"))).collect();
        let names: Vec<String> = (0..classes).map(|c| format!("c{c}")).collect();
        let mut ds = Dataset::new("toy", attrs, Attribute::nominal("class", names).unwrap()).unwrap();
        for (x, y) in rows {
            ds.push(x.to_vec(), *y).unwrap();
        }
        ds
    }

    fn fit(ds: &Dataset, params: TreeParams) -> TreeModel {
        let rows: Vec<usize> = (0..ds.len()).collect();
        fit_tree(&TrainView::new(ds, &rows), &params, &mut Prng::from_state(0)).unwrap()
    }

    #[test]
    fn pure_data_is_one_leaf() {
        let ds = toy(&[(&[1.0], 1), (&[2.0], 1), (&[3.0], 1)], 2);
        let t = fit(&ds, TreeParams::default());
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict_dist(&[0.0]), &[0.0, 1.0]);
    }

    #[test]
    fn perfect_split_gain() {
        assert_eq!(gini_gain(&[2, 2], &[2, 0], &[0, 2]), 0.5);
        let ds = toy(&[(&[0.0], 0), (&[1.0], 0), (&[2.0], 1), (&[3.0], 1)], 2);
        let t = fit(&ds, TreeParams::default());
        assert_eq!(t.nodes()[0], Node::Split { feature: 0, threshold: 1.5, right: 2 });
        assert_eq!(t.depth(), 1);
        assert_eq!(t.predict_dist(&[1.5]), &[1.0, 0.0]);
        assert_eq!(t.predict_dist(&[1.6]), &[0.0, 1.0]);
    }

    #[test]
    fn xor_needs_two_levels() {
        let ds = toy(
            &[(&[0.0, 0.0], 0), (&[0.0, 1.0], 1), (&[1.0, 0.0], 1), (&[1.0, 1.0], 0)],
            2,
        );
        let t = fit(&ds, TreeParams::default());
        assert_eq!(t.depth(), 2);
        // Every root split has zero gain; the tie goes to feature 0.
        assert!(matches!(t.nodes()[0], Node::Split { feature: 0, .. }));
        for i in 0..ds.len() {
            let dist = t.predict_dist(ds.row(i));
            assert_eq!(dist[ds.label(i)], 1.0);
        }
    }

    #[test]
    fn ties_prefer_lower_feature_and_threshold() {
        // Both features separate the classes perfectly.
        let ds = toy(&[(&[0.0, 5.0], 0), (&[1.0, 6.0], 1)], 2);
        let t = fit(&ds, TreeParams::default());
        assert_eq!(t.nodes()[0], Node::Split { feature: 0, threshold: 0.5, right: 2 });
        // Two equally good thresholds on one feature.
        let ds = toy(&[(&[0.0], 0), (&[1.0], 1), (&[2.0], 0)], 2);
        let t = fit(&ds, TreeParams::default());
        assert!(matches!(t.nodes()[0], Node::Split { threshold, .. } if threshold == 0.5));
    }

    #[test]
    fn min_leaf_limits_growth() {
        let ds = toy(&[(&[0.0], 0), (&[1.0], 1), (&[2.0], 0), (&[3.0], 1)], 2);
        let t = fit(&ds, TreeParams { min_leaf: 3, ..TreeParams::default() });
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict_dist(&[0.0]), &[0.5, 0.5]);
        let t = fit(&ds, TreeParams { min_leaf: 2, ..TreeParams::default() });
        for node in t.nodes() {
            if let Node::Leaf { counts, .. } = node {
                assert!(counts.iter().sum::<u64>() >= 2);
            }
        }
    }

    #[test]
    fn duplicates_with_conflicting_labels_stop() {
        let ds = toy(&[(&[1.0], 0), (&[1.0], 1), (&[1.0], 1)], 2);
        let t = fit(&ds, TreeParams::default());
        assert_eq!(t.nodes().len(), 1);
        let dist = t.predict_dist(&[1.0]);
        assert!((dist[0] - 1.0 / 3.0).abs() < 1e-15 && (dist[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_training_and_bad_params() {
        let ds = toy(&[(&[1.0], 0)], 2);
        let none: Vec<usize> = Vec::new();
        let mut rng = Prng::from_state(0);
        let err = fit_tree(&TrainView::new(&ds, &none), &TreeParams::default(), &mut rng);
        assert_eq!(err.unwrap_err(), LearnError::EmptyTraining);
        let rows = [0];
        let bad = TreeParams { max_features: MaxFeatures::Count(2), min_leaf: 1 };
        assert!(fit_tree(&TrainView::new(&ds, &rows), &bad, &mut rng).is_err());
    }

    #[test]
    fn midpoint_between_adjacent_floats() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let m = midpoint(lo, hi);
        assert!(m >= lo && m < hi);
        assert_eq!(midpoint(1.0, 2.0), 1.5);
    }

    #[test]
    fn validate_catches_broken_links() {
        let ds = toy(&[(&[0.0], 0), (&[1.0], 1)], 2);
        let mut t = fit(&ds, TreeParams::default());
        assert!(t.validate().is_ok());
        if let Node::Split { right, .. } = &mut t.nodes[0] {
            *right = 1;
        }
        assert!(t.validate().is_err());
    }
}
