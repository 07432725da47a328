//! Minimal differentiable CNN engine: model container, shape inference,
//! forward inference and backpropagation to the input image.

mod backward;
mod container;
mod forward;
mod graph;
mod layer;
mod shape;
mod tensor;

pub mod reference;

pub use backward::{backward, backward_to_input, Gradients};
pub use container::{load_model, load_model_file, save_model, save_model_file, MAGIC};
pub use forward::{forward, sigmoid, ForwardTrace};
pub use graph::{GraphBuilder, ModelGraph, ModelMeta, CONTAINER_FORMAT_VERSION};
pub use layer::{Conv2dParams, LayerKind, LayerOp, LayerSpec, ParamSlice};
pub use shape::{infer_shapes, Shape};
pub use tensor::TensorF32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("malformed model container: {0}")]
    Malformed(String),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("layer {layer}: unsupported layer kind `{kind}`")]
    UnsupportedLayer { layer: usize, kind: String },
    #[error("layer {layer}: {reason}")]
    InvalidLayer { layer: usize, reason: String },
    #[error("shape inference failed at layer {layer}: {reason}")]
    ShapeInference { layer: usize, reason: String },
    #[error("input shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("trace does not belong to this model: {0}")]
    TraceMismatch(String),
    #[error("tensor shape {shape:?} does not match {len} values")]
    InvalidTensor { shape: Vec<usize>, len: usize },
    #[error("i/o error: {0}")]
    Io(String),
}
