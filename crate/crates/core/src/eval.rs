//! Stratified k-fold cross-validation, accuracy and confusion matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::{stratified_folds, Dataset, FoldError};
use crate::learners::{argmax, LearnError, LearnerSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("label sequences differ in length: {actual} actual vs {predicted} predicted")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("no labels to score")]
    Empty,
    #[error("label {label} out of range for {classes} classes")]
    LabelRange { label: usize, classes: usize },
    #[error(transparent)]
    Fold(#[from] FoldError),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// `cells[actual][predicted]` counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub cells: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        Self { classes, cells: vec![vec![0; k]; k] }
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.cells.len()).map(|i| self.cells[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.cells.iter().map(|r| r.iter().sum()).collect()
    }

    /// Percent correct; 0 for an empty matrix.
    pub fn accuracy_percent(&self) -> f64 {
        percent(self.correct(), self.total())
    }
}

fn percent(correct: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * correct as f64 / total as f64
    }
}

/// `100 * correct / total` rendered with exactly two decimals, rounding
/// half-up on the exact fraction (not on its binary approximation).
pub fn format_percent(correct: u64, total: u64) -> String {
    if total == 0 {
        return "0.00".to_owned();
    }
    let (c, t) = (u128::from(correct), u128::from(total));
    let hundredths = (c * 20_000 + t) / (2 * t);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

pub fn accuracy_and_confusion(
    actual: &[usize],
    predicted: &[usize],
    classes: &[String],
) -> Result<(f64, ConfusionMatrix), EvalError> {
    if actual.len() != predicted.len() {
        return Err(EvalError::LengthMismatch { actual: actual.len(), predicted: predicted.len() });
    }
    if actual.is_empty() {
        return Err(EvalError::Empty);
    }
    let k = classes.len();
    let mut cm = ConfusionMatrix::new(classes.to_vec());
    for (&a, &p) in actual.iter().zip(predicted) {
        if a >= k || p >= k {
            return Err(EvalError::LabelRange { label: a.max(p), classes: k });
        }
        cm.cells[a][p] += 1;
    }
    Ok((cm.accuracy_percent(), cm))
}

/// Outcome of one cross-validation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub learner: String,
    pub params: LearnerSpec,
    pub k: usize,
    pub seed: u64,
    pub accuracy_percent: f64,
    /// `accuracy_percent` with two decimals.
    pub accuracy: String,
    pub correct: u64,
    pub total: u64,
    pub per_fold_accuracy: Vec<f64>,
    pub confusion: ConfusionMatrix,
}

impl EvalReport {
    /// `<name>\t<accuracy>`, one line of the comparison table.
    pub fn table_line(&self) -> String {
        format!("{}\t{}", self.learner, self.accuracy)
    }
}

/// Stratified k-fold cross-validation with a pooled confusion matrix.
///
/// The fold plan depends only on the class labels, `k` and `seed`, so every
/// learner evaluated with the same arguments sees the same partitions. Each
/// fold's model is trained with `seed`; folds may run in parallel and are
/// aggregated in fold order.
pub fn cross_validate(ds: &Dataset, spec: &LearnerSpec, k: usize, seed: u64) -> Result<EvalReport, EvalError> {
    let plan = stratified_folds(ds, k, seed)?;
    let folds: Vec<(Vec<usize>, Vec<usize>)> = (0..k)
        .into_par_iter()
        .map(|f| -> Result<_, EvalError> {
            let test = plan.test_indices(f);
            let model = spec.fit(ds, &plan.train_indices(f), seed)?;
            let predicted = test
                .iter()
                .map(|&i| model.predict_dist(ds.row(i)).map(|d| argmax(&d)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((test, predicted))
        })
        .collect::<Result<_, _>>()?;

    let mut confusion = ConfusionMatrix::new(ds.class_names().to_vec());
    let mut per_fold_accuracy = Vec::with_capacity(k);
    for (test, predicted) in &folds {
        let mut hits = 0u64;
        for (&i, &p) in test.iter().zip(predicted) {
            confusion.cells[ds.label(i)][p] += 1;
            hits += u64::from(ds.label(i) == p);
        }
        per_fold_accuracy.push(percent(hits, test.len() as u64));
    }
    let (correct, total) = (confusion.correct(), confusion.total());
    Ok(EvalReport {
        learner: spec.name().to_owned(),
        params: spec.clone(),
        k,
        seed,
        accuracy_percent: confusion.accuracy_percent(),
        accuracy: format_percent(correct, total),
        correct,
        total,
        per_fold_accuracy,
        confusion,
    })
}

/// Tab-separated lines, one per report.
pub fn render_table(reports: &[EvalReport]) -> String {
    reports.iter().map(|r| r.table_line() + "\n").collect()
}
