use rayon::prelude::*;

use super::graph::ModelGraph;
use super::layer::{Conv2dParams, LayerOp};
use super::tensor::TensorF32;
use super::EngineError;

/// Cached activations of one forward pass, consumed by the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub(crate) input: TensorF32,
    /// Output of every layer, index-aligned with the model's layers.
    pub(crate) outputs: Vec<TensorF32>,
    /// For max-pool layers: flat input index selected by each output element.
    pub(crate) argmax: Vec<Option<Vec<u32>>>,
    logit: f32,
    probability: f64,
}

impl ForwardTrace {
    pub fn logit(&self) -> f32 {
        self.logit
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }

    pub fn input(&self) -> &TensorF32 {
        &self.input
    }

    pub fn layer_outputs(&self) -> &[TensorF32] {
        &self.outputs
    }

    pub fn layer_count(&self) -> usize {
        self.outputs.len()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Runs the network on `input`. Output is bit-reproducible for identical
/// model and input.
pub fn forward(model: &ModelGraph, input: &TensorF32) -> Result<ForwardTrace, EngineError> {
    if input.shape() != model.input_shape() {
        return Err(EngineError::ShapeMismatch {
            expected: model.input_shape().to_vec(),
            actual: input.shape().to_vec(),
        });
    }
    let layers = model.layers();
    let mut outputs: Vec<TensorF32> = Vec::with_capacity(layers.len());
    let mut argmax = Vec::with_capacity(layers.len());
    let mut logit = 0.0f32;
    let mut probability = 0.5f64;

    for (i, layer) in layers.iter().enumerate() {
        let x = if i == 0 { input } else { &outputs[i - 1] };
        let in_shape = model.layer_input_shape(i);
        let out_shape = model.layer_shapes()[i].clone();
        let mut routes = None;
        let data = match layer.op {
            LayerOp::Conv2d(c) => conv2d(
                x.data(),
                in_shape,
                &out_shape,
                &c,
                model.layer_weights(i),
                model.layer_bias(i),
            ),
            LayerOp::Relu => x
                .data()
                .iter()
                .map(|&v| if v > 0.0 { v } else { 0.0 })
                .collect(),
            LayerOp::MaxPool2d { size, stride } => {
                let (out, idx) = maxpool(x.data(), in_shape, &out_shape, size, stride);
                routes = Some(idx);
                out
            }
            LayerOp::GlobalAvgPool => global_avg_pool(x.data(), in_shape),
            LayerOp::Dense {
                in_features,
                out_features,
            } => dense(
                x.data(),
                in_features,
                out_features,
                model.layer_weights(i),
                model.layer_bias(i),
            ),
            LayerOp::AddSkip { source } => x
                .data()
                .iter()
                .zip(outputs[source].data())
                .map(|(a, b)| a + b)
                .collect(),
            LayerOp::SigmoidOutput => {
                logit = x.data()[0];
                probability = sigmoid(logit as f64);
                vec![probability as f32]
            }
        };
        outputs.push(TensorF32::new(out_shape, data)?);
        argmax.push(routes);
    }

    Ok(ForwardTrace {
        input: input.clone(),
        outputs,
        argmax,
        logit,
        probability,
    })
}

fn conv2d(
    x: &[f32],
    in_shape: &[usize],
    out_shape: &[usize],
    c: &Conv2dParams,
    weights: &[f32],
    bias: &[f32],
) -> Vec<f32> {
    let (h, w, cin) = (in_shape[0], in_shape[1], in_shape[2]);
    let (oh, ow, cout) = (out_shape[0], out_shape[1], out_shape[2]);
    let (kh, kw) = (c.kernel_h, c.kernel_w);
    let mut out = vec![0.0f32; oh * ow * cout];
    out.par_chunks_mut(ow * cout)
        .enumerate()
        .for_each(|(oy, row)| {
            for ox in 0..ow {
                for co in 0..cout {
                    let mut acc = bias[co] as f64;
                    for ky in 0..kh {
                        let iy = (oy * c.stride + ky) as isize - c.padding as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for kx in 0..kw {
                            let ix = (ox * c.stride + kx) as isize - c.padding as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let px = &x[(iy as usize * w + ix as usize) * cin..][..cin];
                            let wk = &weights[((co * kh + ky) * kw + kx) * cin..][..cin];
                            for (a, b) in px.iter().zip(wk) {
                                acc += *a as f64 * *b as f64;
                            }
                        }
                    }
                    row[ox * cout + co] = acc as f32;
                }
            }
        });
    out
}

/// Max pooling; ties resolve to the first maximal element in window scan
/// order (row-major).
fn maxpool(
    x: &[f32],
    in_shape: &[usize],
    out_shape: &[usize],
    size: usize,
    stride: usize,
) -> (Vec<f32>, Vec<u32>) {
    let (w, ch) = (in_shape[1], in_shape[2]);
    let (oh, ow) = (out_shape[0], out_shape[1]);
    let mut out = Vec::with_capacity(oh * ow * ch);
    let mut idx = Vec::with_capacity(oh * ow * ch);
    for oy in 0..oh {
        for ox in 0..ow {
            for c in 0..ch {
                let mut best = f32::NEG_INFINITY;
                let mut best_i = 0usize;
                let mut first = true;
                for ky in 0..size {
                    for kx in 0..size {
                        let i = ((oy * stride + ky) * w + ox * stride + kx) * ch + c;
                        if first || x[i] > best {
                            best = x[i];
                            best_i = i;
                            first = false;
                        }
                    }
                }
                out.push(best);
                idx.push(best_i as u32);
            }
        }
    }
    (out, idx)
}

fn global_avg_pool(x: &[f32], in_shape: &[usize]) -> Vec<f32> {
    let ch = in_shape[2];
    let n = in_shape[0] * in_shape[1];
    let mut acc = vec![0.0f64; ch];
    for px in x.chunks_exact(ch) {
        for (a, v) in acc.iter_mut().zip(px) {
            *a += *v as f64;
        }
    }
    acc.into_iter().map(|a| (a / n as f64) as f32).collect()
}

fn dense(x: &[f32], n_in: usize, n_out: usize, weights: &[f32], bias: &[f32]) -> Vec<f32> {
    (0..n_out)
        .map(|o| {
            let row = &weights[o * n_in..(o + 1) * n_in];
            let acc = row
                .iter()
                .zip(x)
                .fold(bias[o] as f64, |acc, (w, v)| acc + *w as f64 * *v as f64);
            acc as f32
        })
        .collect()
}
