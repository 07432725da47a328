use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{augment, AugmentConfig, DataError, DatasetManifest, Split, SplitAssignment};
use crate::detector::{init_output_bias, Label};
use crate::engine::reference::INPUT_SIDE;
use crate::engine::{backward, forward, ModelGraph};
use crate::preprocess::{normalize, resize_bilinear, RawImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Re-initialize weights before training (Kaiming hidden layers, zero
    /// logit weights). When false the template's weights are kept.
    pub reinit: bool,
    pub augment: AugmentConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 8,
            learning_rate: 0.1,
            batch_size: 16,
            seed: 0,
            reinit: true,
            augment: AugmentConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean training loss of each epoch, measured before each step's update.
    pub epoch_losses: Vec<f64>,
    pub train_counts: (usize, usize),
    pub output_bias: f64,
}

/// Kaiming-uniform hidden layers, zero weights on the logit layer and the
/// log-ratio output bias, so the untrained model predicts the class prior.
pub fn init_training_weights(
    model: &mut ModelGraph,
    seed: u64,
    n_ai: u64,
    n_human: u64,
) -> Result<f64, DataError> {
    model.init_kaiming(seed);
    let out = model
        .output_layer()
        .expect("graph has a parameterised layer");
    let slice = model.layers()[out].weight;
    model.weights_mut()[slice.range()].fill(0.0);
    set_prior_bias(model, n_ai, n_human)
}

fn set_prior_bias(model: &mut ModelGraph, n_ai: u64, n_human: u64) -> Result<f64, DataError> {
    let bias = init_output_bias(n_ai, n_human).map_err(|e| DataError::Config(e.to_string()))?;
    model.set_output_bias(bias as f32)?;
    Ok(bias)
}

/// Binary cross-entropy of a logit, computed stably.
fn bce_with_logit(logit: f64, target: f64) -> f64 {
    logit.max(0.0) - logit * target + (-logit.abs()).exp().ln_1p()
}

/// Minibatch SGD on binary cross-entropy. Augmentation applies to the train
/// split only. Results are bit-identical for a given seed: per-example
/// gradients may run in parallel but are summed in batch order.
pub fn train_toy(
    template: &ModelGraph,
    manifest: &DatasetManifest,
    assignment: &SplitAssignment,
    config: &TrainConfig,
) -> Result<(ModelGraph, TrainReport), DataError> {
    config.augment.validate()?;
    if config.batch_size == 0 {
        return Err(DataError::Config("batch_size must be positive".into()));
    }
    if !(config.learning_rate.is_finite() && config.learning_rate > 0.0) {
        return Err(DataError::Config("learning rate must be positive".into()));
    }
    if assignment.splits().len() != manifest.len() {
        return Err(DataError::SplitSize {
            got: assignment.splits().len(),
            want: manifest.len(),
        });
    }
    let train_idx = assignment.indices(Split::Train);
    if train_idx.is_empty() {
        return Err(DataError::EmptySplit("train".into()));
    }
    let n_ai = train_idx
        .iter()
        .filter(|&&i| manifest.entries()[i].label == Label::Ai)
        .count();
    let n_human = train_idx.len() - n_ai;

    let mut model = template.clone();
    let output_bias = if config.reinit {
        init_training_weights(&mut model, config.seed, n_ai as u64, n_human as u64)?
    } else {
        set_prior_bias(&mut model, n_ai as u64, n_human as u64)?
    };
    let mut report = TrainReport {
        epoch_losses: Vec::with_capacity(config.epochs),
        train_counts: (n_ai, n_human),
        output_bias,
    };
    if config.epochs == 0 {
        return Ok((model, report));
    }

    let images: Vec<RawImage> = train_idx
        .par_iter()
        .map(|&i| {
            manifest
                .load_image(i)
                .map(|img| resize_bilinear(&img, INPUT_SIDE, INPUT_SIDE))
        })
        .collect::<Result<_, _>>()?;
    let targets: Vec<f64> = train_idx
        .iter()
        .map(|&i| {
            if manifest.entries()[i].label == Label::Ai {
                1.0
            } else {
                0.0
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ config.augment.seed.rotate_left(32));
    let mut order: Vec<usize> = (0..images.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let draws: Vec<_> = batch
                .iter()
                .map(|_| config.augment.sample(&mut rng))
                .collect();
            let model_ref = &model;
            let results = batch
                .par_iter()
                .zip(&draws)
                .map(|(&k, draw)| {
                    let img = augment(&images[k], draw);
                    let input = normalize(&img).expect("resized to input size");
                    let trace = forward(model_ref, input.tensor())?;
                    let logit = trace.logit() as f64;
                    let loss = bce_with_logit(logit, targets[k]);
                    let grads = backward(
                        model_ref,
                        &trace,
                        trace.probability() - targets[k],
                        false,
                        true,
                    )?;
                    Ok((loss, grads.params.expect("requested")))
                })
                .collect::<Result<Vec<_>, DataError>>()?;

            let mut total = vec![0.0f64; model.param_count()];
            for (loss, g) in &results {
                loss_sum += loss;
                for (t, v) in total.iter_mut().zip(g) {
                    *t += v;
                }
            }
            let step = config.learning_rate / batch.len() as f64;
            for (w, g) in model.weights_mut().iter_mut().zip(&total) {
                *w = (*w as f64 - step * g) as f32;
            }
        }
        let mean = loss_sum / images.len() as f64;
        if !mean.is_finite() || model.weights().iter().any(|w| !w.is_finite()) {
            return Err(DataError::Diverged { epoch, loss: mean });
        }
        tracing::debug!(epoch, loss = mean, "epoch complete");
        report.epoch_losses.push(mean);
    }
    Ok((model, report))
}
