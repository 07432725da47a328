//! Dataset manifests, stratified splits, augmentation, desk-scale training
//! and metric evaluation.

mod augment;
mod manifest;
mod metrics;
mod split;
pub mod synth;
mod train;

pub use augment::{augment, AugmentConfig, AugmentDraw};
pub use manifest::{DatasetManifest, ManifestEntry};
pub use metrics::{evaluate, metrics_from_predictions, Metrics};
pub use split::{
    stratified_split, stratified_split_by, Split, SplitAssignment, Stratify, SPLIT_RATIOS,
};
pub use train::{init_training_weights, train_toy, TrainConfig, TrainReport};

use crate::detector::Label;
use crate::engine::EngineError;
use crate::preprocess::PreprocessError;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate manifest path `{0}`")]
    DuplicatePath(String),
    #[error("class {label} has {count} entries, at least {min} required")]
    ClassTooSmall {
        label: Label,
        count: usize,
        min: usize,
    },
    #[error("split file does not cover manifest path `{0}`")]
    MissingSplit(String),
    #[error("split `{0}` is empty")]
    EmptySplit(String),
    #[error("split assignment covers {got} entries, manifest has {want}")]
    SplitSize { got: usize, want: usize },
    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Image {
        path: String,
        #[source]
        source: PreprocessError,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub(crate) fn io_err(path: impl AsRef<std::path::Path>, e: impl std::fmt::Display) -> DataError {
    DataError::Io {
        path: path.as_ref().display().to_string(),
        message: e.to_string(),
    }
}
