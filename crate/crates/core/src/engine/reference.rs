//! The compact detector: a small residual CNN built from the engine's layer
//! set, used as the default reference model.

use super::graph::{GraphBuilder, ModelGraph, ModelMeta};
use super::EngineError;

pub const INPUT_SIDE: usize = 256;
pub const INPUT_CHANNELS: usize = 3;
pub const COMPACT_DETECTOR_NAME: &str = "compact-detector";

/// Class counts shipped in the default model metadata.
pub const DEFAULT_N_AI: u64 = 190_549;
pub const DEFAULT_N_HUMAN: u64 = 81_444;

pub fn input_shape() -> Vec<usize> {
    vec![INPUT_SIDE, INPUT_SIDE, INPUT_CHANNELS]
}

/// Zero-weight compact detector.
///
/// ```text
/// 256x256x3 -conv3x3/2-> 128x128x8 -relu-> -pool2-> 64x64x8
///   -conv3x3-> relu -conv3x3-> (+skip) relu -pool2-> 32x32x8
///   -conv3x3/2-> 16x16x16 -relu-> gap 16 -dense-> 1 -sigmoid->
/// ```
pub fn compact_detector(n_ai: u64, n_human: u64) -> Result<ModelGraph, EngineError> {
    let b = GraphBuilder::new(input_shape())
        .conv2d(3, 2, 1, INPUT_CHANNELS, 8)
        .relu()
        .maxpool(2, 2);
    let block_in = b.next_index() - 1;
    b.conv2d(3, 1, 1, 8, 8)
        .relu()
        .conv2d(3, 1, 1, 8, 8)
        .add_skip(block_in)
        .relu()
        .maxpool(2, 2)
        .conv2d(3, 2, 1, 8, 16)
        .relu()
        .global_avg_pool()
        .dense(16, 1)
        .sigmoid_output()
        .build(ModelMeta::new(COMPACT_DETECTOR_NAME, n_ai, n_human))
}

/// Single dense layer over the flattened image; the smallest legal detector.
pub fn linear_detector(n_ai: u64, n_human: u64) -> Result<ModelGraph, EngineError> {
    let n = INPUT_SIDE * INPUT_SIDE * INPUT_CHANNELS;
    GraphBuilder::new(input_shape())
        .dense(n, 1)
        .sigmoid_output()
        .build(ModelMeta::new("linear-detector", n_ai, n_human))
}
