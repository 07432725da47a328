//! Detection of AI-generated images with a compact CNN, explained by
//! vanilla-gradient saliency overlays.
//!
//! The pipeline is `preprocess` (decode, resize to 256x256, scale to [0,1])
//! then `engine::forward`, `detector::classify`, and for positive detections
//! `saliency::explain`, which backpropagates the logit to the input and
//! blends a colorized map over the original image.

pub mod bench;
pub mod datakit;
pub mod detector;
pub mod engine;
pub mod preprocess;
pub mod saliency;
pub mod service;

mod error;

pub use error::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;
