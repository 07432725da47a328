use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layer::{Conv2dParams, LayerKind, LayerOp, LayerSpec, ParamSlice};
use super::shape::{infer_shapes, Shape};
use super::EngineError;

pub const CONTAINER_FORMAT_VERSION: u32 = 1;

/// Descriptive metadata carried in the container header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelMeta {
    pub name: String,
    pub format_version: u32,
    /// Class counts the model was trained on (output-bias prior).
    pub n_ai: u64,
    pub n_human: u64,
}

impl ModelMeta {
    pub fn new(name: impl Into<String>, n_ai: u64, n_human: u64) -> Self {
        Self {
            name: name.into(),
            format_version: CONTAINER_FORMAT_VERSION,
            n_ai,
            n_human,
        }
    }
}

/// A validated classifier network: ordered layers, the flat weight blob and
/// the inferred per-layer output shapes.
///
/// Construction always runs shape inference and checks every parameter slice,
/// so a `ModelGraph` in hand is ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGraph {
    meta: ModelMeta,
    input_shape: Shape,
    layers: Vec<LayerSpec>,
    weights: Vec<f32>,
    shapes: Vec<Shape>,
}

impl ModelGraph {
    pub fn new(
        meta: ModelMeta,
        input_shape: Shape,
        layers: Vec<LayerSpec>,
        weights: Vec<f32>,
    ) -> Result<Self, EngineError> {
        if layers.is_empty() {
            return Err(EngineError::ShapeInference {
                layer: 0,
                reason: "graph has no layers".into(),
            });
        }
        for (i, layer) in layers.iter().enumerate() {
            let (w, b) = layer.op.param_counts();
            let check = |slice: ParamSlice, want: usize, what: &str| {
                if slice.len != want {
                    return Err(EngineError::InvalidLayer {
                        layer: i,
                        reason: format!("{what} slice holds {} values, expected {want}", slice.len),
                    });
                }
                if slice.end() > weights.len() {
                    return Err(EngineError::InvalidLayer {
                        layer: i,
                        reason: format!(
                            "{what} slice {}..{} exceeds weight blob of {}",
                            slice.offset,
                            slice.end(),
                            weights.len()
                        ),
                    });
                }
                Ok(())
            };
            check(layer.weight, w, "weight")?;
            check(layer.bias, b, "bias")?;
            if layer.kind() == LayerKind::SigmoidOutput && i + 1 != layers.len() {
                return Err(EngineError::ShapeInference {
                    layer: i,
                    reason: "sigmoid_output must be the final layer".into(),
                });
            }
        }
        let last = layers.len() - 1;
        if layers[last].kind() != LayerKind::SigmoidOutput {
            return Err(EngineError::ShapeInference {
                layer: last,
                reason: "graph must end in sigmoid_output".into(),
            });
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(EngineError::Malformed(format!("weight {i} is not finite")));
        }
        let shapes = infer_shapes(&layers, &input_shape)?;
        Ok(Self {
            meta,
            input_shape,
            layers,
            weights,
            shapes,
        })
    }

    pub fn meta(&self) -> &ModelMeta {
        &self.meta
    }

    pub fn name(&self) -> &str {
        &self.meta.name
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    /// Mutable access to the parameter blob. Layout and lengths are fixed.
    pub fn weights_mut(&mut self) -> &mut [f32] {
        &mut self.weights
    }

    /// Output shape of every layer, in order.
    pub fn layer_shapes(&self) -> &[Shape] {
        &self.shapes
    }

    /// Shape of the tensor feeding layer `index`.
    pub fn layer_input_shape(&self, index: usize) -> &[usize] {
        if index == 0 {
            &self.input_shape
        } else {
            &self.shapes[index - 1]
        }
    }

    pub fn layer_weights(&self, index: usize) -> &[f32] {
        &self.weights[self.layers[index].weight.range()]
    }

    pub fn layer_bias(&self, index: usize) -> &[f32] {
        &self.weights[self.layers[index].bias.range()]
    }

    /// Index of the layer producing the logit (the last parameterised layer
    /// before `sigmoid_output`).
    pub fn output_layer(&self) -> Option<usize> {
        self.layers.iter().rposition(|l| l.op.has_params())
    }

    /// Overwrites the output layer's bias. Only meaningful when it produces a
    /// single logit directly.
    pub fn set_output_bias(&mut self, bias: f32) -> Result<(), EngineError> {
        let idx = self
            .output_layer()
            .ok_or_else(|| EngineError::InvalidLayer {
                layer: self.layers.len() - 1,
                reason: "graph has no parameterised output layer".into(),
            })?;
        let slice = self.layers[idx].bias;
        if slice.len != 1 {
            return Err(EngineError::InvalidLayer {
                layer: idx,
                reason: format!("output layer has {} biases, expected 1", slice.len),
            });
        }
        self.weights[slice.offset] = bias;
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.weights.len()
    }

    /// Kaiming-uniform (fan-in) weights, zero biases. Leaves the output bias
    /// to the caller.
    pub fn init_kaiming(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &self.layers {
            let fan_in = match layer.op {
                LayerOp::Conv2d(c) => c.kernel_h * c.kernel_w * c.in_channels,
                LayerOp::Dense { in_features, .. } => in_features,
                _ => continue,
            };
            let bound = (6.0 / fan_in as f64).sqrt();
            for w in &mut self.weights[layer.weight.range()] {
                *w = rng.random_range(-bound..bound) as f32;
            }
            self.weights[layer.bias.range()].fill(0.0);
        }
    }
}

/// Appends layers and allocates their parameter slices contiguously.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    input_shape: Shape,
    layers: Vec<LayerSpec>,
    next_offset: usize,
}

impl GraphBuilder {
    pub fn new(input_shape: Shape) -> Self {
        Self {
            input_shape,
            layers: Vec::new(),
            next_offset: 0,
        }
    }

    /// Index the next pushed layer will get.
    pub fn next_index(&self) -> usize {
        self.layers.len()
    }

    pub fn push(&mut self, op: LayerOp) -> usize {
        let (w, b) = op.param_counts();
        let weight = ParamSlice::new(if w > 0 { self.next_offset } else { 0 }, w);
        self.next_offset += w;
        let bias = ParamSlice::new(if b > 0 { self.next_offset } else { 0 }, b);
        self.next_offset += b;
        self.layers.push(LayerSpec::new(op, weight, bias));
        self.layers.len() - 1
    }

    pub fn conv2d(
        mut self,
        kernel: usize,
        stride: usize,
        padding: usize,
        cin: usize,
        cout: usize,
    ) -> Self {
        self.push(LayerOp::Conv2d(Conv2dParams {
            kernel_h: kernel,
            kernel_w: kernel,
            stride,
            padding,
            in_channels: cin,
            out_channels: cout,
        }));
        self
    }

    pub fn relu(mut self) -> Self {
        self.push(LayerOp::Relu);
        self
    }

    pub fn maxpool(mut self, size: usize, stride: usize) -> Self {
        self.push(LayerOp::MaxPool2d { size, stride });
        self
    }

    pub fn global_avg_pool(mut self) -> Self {
        self.push(LayerOp::GlobalAvgPool);
        self
    }

    pub fn dense(mut self, in_features: usize, out_features: usize) -> Self {
        self.push(LayerOp::Dense {
            in_features,
            out_features,
        });
        self
    }

    pub fn add_skip(mut self, source: usize) -> Self {
        self.push(LayerOp::AddSkip { source });
        self
    }

    pub fn sigmoid_output(mut self) -> Self {
        self.push(LayerOp::SigmoidOutput);
        self
    }

    /// Builds with all-zero parameters.
    pub fn build(self, meta: ModelMeta) -> Result<ModelGraph, EngineError> {
        let weights = vec![0.0; self.next_offset];
        ModelGraph::new(meta, self.input_shape, self.layers, weights)
    }
}
