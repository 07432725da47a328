use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DataError, DatasetManifest, Split, SplitAssignment};
use crate::detector::Label;
use crate::engine::{forward, ModelGraph};
use crate::preprocess::prepare;

const PROB_CLAMP: f64 = 1e-7;

/// Binary classification metrics with "ai" as the positive class.
///
/// Precision (recall) is reported as 0 when there are no predicted (actual)
/// positives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    /// Mean binary cross-entropy, probabilities clamped to [1e-7, 1 − 1e-7].
    pub loss: f64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Metrics {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Metrics for predicted probabilities against true labels.
pub fn metrics_from_predictions(
    probs: &[f64],
    labels: &[Label],
    threshold: f64,
) -> Result<Metrics, DataError> {
    if probs.is_empty() {
        return Err(DataError::EmptySplit("predictions".into()));
    }
    if probs.len() != labels.len() {
        return Err(DataError::Config(format!(
            "{} predictions for {} labels",
            probs.len(),
            labels.len()
        )));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    let mut loss = 0.0;
    for (&p, &label) in probs.iter().zip(labels) {
        let predicted_ai = p >= threshold;
        match (predicted_ai, label) {
            (true, Label::Ai) => tp += 1,
            (true, Label::Human) => fp += 1,
            (false, Label::Human) => tn += 1,
            (false, Label::Ai) => fn_ += 1,
        }
        let q = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        loss -= match label {
            Label::Ai => q.ln(),
            Label::Human => (1.0 - q).ln(),
        };
    }
    let total = probs.len() as u64;
    Ok(Metrics {
        accuracy: ratio(tp + tn, total),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        loss: loss / total as f64,
        tp,
        fp,
        tn,
        fn_,
    })
}

/// Runs `model` over every entry of `split` and scores it.
pub fn evaluate(
    model: &ModelGraph,
    manifest: &DatasetManifest,
    assignment: &SplitAssignment,
    split: Split,
    threshold: f64,
) -> Result<Metrics, DataError> {
    if assignment.splits().len() != manifest.len() {
        return Err(DataError::SplitSize {
            got: assignment.splits().len(),
            want: manifest.len(),
        });
    }
    let indices = assignment.indices(split);
    if indices.is_empty() {
        return Err(DataError::EmptySplit(split.to_string()));
    }
    let probs = indices
        .par_iter()
        .map(|&i| {
            let img = manifest.load_image(i)?;
            Ok(forward(model, prepare(&img).tensor())?.probability())
        })
        .collect::<Result<Vec<f64>, DataError>>()?;
    let labels: Vec<Label> = indices
        .iter()
        .map(|&i| manifest.entries()[i].label)
        .collect();
    metrics_from_predictions(&probs, &labels, threshold)
}
