use rayon::prelude::*;

use super::forward::ForwardTrace;
use super::graph::ModelGraph;
use super::layer::{Conv2dParams, LayerOp};
use super::tensor::TensorF32;
use super::EngineError;

/// Gradients of a scalar seed placed on the logit, accumulated in `f64`.
#[derive(Debug, Clone)]
pub struct Gradients {
    /// d(seed · logit)/d(input), same layout as the input tensor. Empty when
    /// not requested.
    pub input: Vec<f64>,
    /// Same layout as the model weight blob; present when requested.
    pub params: Option<Vec<f64>>,
}

/// ∂logit/∂input for one traced forward pass.
pub fn backward_to_input(
    model: &ModelGraph,
    trace: &ForwardTrace,
) -> Result<TensorF32, EngineError> {
    let grads = backward(model, trace, 1.0, true, false)?;
    let data = grads.input.into_iter().map(|g| g as f32).collect();
    TensorF32::new(model.input_shape().to_vec(), data)
}

fn check_trace(model: &ModelGraph, trace: &ForwardTrace) -> Result<(), EngineError> {
    if trace.outputs.len() != model.layers().len() {
        return Err(EngineError::TraceMismatch(format!(
            "trace has {} layers, model has {}",
            trace.outputs.len(),
            model.layers().len()
        )));
    }
    if trace.input.shape() != model.input_shape() {
        return Err(EngineError::TraceMismatch(format!(
            "trace input {:?} does not match model input {:?}",
            trace.input.shape(),
            model.input_shape()
        )));
    }
    for (i, (out, shape)) in trace.outputs.iter().zip(model.layer_shapes()).enumerate() {
        if out.shape() != shape.as_slice() {
            return Err(EngineError::TraceMismatch(format!(
                "layer {i} output {:?} does not match model shape {shape:?}",
                out.shape()
            )));
        }
        let pooled = matches!(model.layers()[i].op, LayerOp::MaxPool2d { .. });
        if pooled != trace.argmax[i].is_some() {
            return Err(EngineError::TraceMismatch(format!(
                "layer {i} kind differs from trace"
            )));
        }
    }
    Ok(())
}

/// Backpropagates `seed` (dLoss/dlogit) through the traced pass. The sigmoid
/// is skipped: gradients are taken with respect to the pre-sigmoid logit.
pub fn backward(
    model: &ModelGraph,
    trace: &ForwardTrace,
    seed: f64,
    want_input: bool,
    want_params: bool,
) -> Result<Gradients, EngineError> {
    check_trace(model, trace)?;
    let layers = model.layers();
    let n = layers.len();
    // grads[i] = gradient w.r.t. the output of layer i; grads[n] is the input.
    let mut grads: Vec<Option<Vec<f64>>> = vec![None; n + 1];
    let mut params = want_params.then(|| vec![0.0f64; model.param_count()]);

    // Seed the logit (input of the final sigmoid_output layer).
    let last = n - 1;
    let logit_slot = if last == 0 { n } else { last - 1 };
    grads[logit_slot] = Some(vec![seed]);

    for i in (0..last).rev() {
        let Some(g_out) = grads[i].take() else {
            continue;
        };
        let in_slot = if i == 0 { n } else { i - 1 };
        let x = if i == 0 {
            &trace.input
        } else {
            &trace.outputs[i - 1]
        };
        let in_shape = model.layer_input_shape(i);
        let out_shape = &model.layer_shapes()[i];
        let spec = &layers[i];

        let g_in: Vec<f64> = match spec.op {
            LayerOp::Conv2d(c) => {
                let w = model.layer_weights(i);
                if let Some(p) = params.as_mut() {
                    let mut pw = vec![0.0f64; spec.weight.len];
                    let mut pb = vec![0.0f64; spec.bias.len];
                    conv2d_param_grads(x.data(), &g_out, in_shape, out_shape, &c, &mut pw, &mut pb);
                    add_into(&mut p[spec.weight.range()], &pw);
                    add_into(&mut p[spec.bias.range()], &pb);
                }
                if i == 0 && !want_input {
                    continue;
                }
                conv2d_input_grad(&g_out, in_shape, out_shape, &c, w)
            }
            LayerOp::Relu => x
                .data()
                .iter()
                .zip(&g_out)
                .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
                .collect(),
            LayerOp::MaxPool2d { .. } => {
                let routes = trace.argmax[i].as_ref().expect("checked");
                let mut g_in = vec![0.0f64; x.len()];
                for (&r, &g) in routes.iter().zip(&g_out) {
                    g_in[r as usize] += g;
                }
                g_in
            }
            LayerOp::GlobalAvgPool => {
                let ch = in_shape[2];
                let inv = 1.0 / (in_shape[0] * in_shape[1]) as f64;
                let mut g_in = vec![0.0f64; x.len()];
                for px in g_in.chunks_exact_mut(ch) {
                    for (d, g) in px.iter_mut().zip(&g_out) {
                        *d = g * inv;
                    }
                }
                g_in
            }
            LayerOp::Dense {
                in_features,
                out_features,
            } => {
                let w = model.layer_weights(i);
                if let Some(p) = params.as_mut() {
                    let pw = &mut p[spec.weight.range()];
                    for o in 0..out_features {
                        let row = &mut pw[o * in_features..(o + 1) * in_features];
                        for (d, v) in row.iter_mut().zip(x.data()) {
                            *d += g_out[o] * *v as f64;
                        }
                    }
                    add_into(&mut p[spec.bias.range()], &g_out);
                }
                let mut g_in = vec![0.0f64; in_features];
                for o in 0..out_features {
                    let row = &w[o * in_features..(o + 1) * in_features];
                    for (d, wv) in g_in.iter_mut().zip(row) {
                        *d += g_out[o] * *wv as f64;
                    }
                }
                g_in
            }
            LayerOp::AddSkip { source } => {
                accumulate(&mut grads[source], &g_out);
                g_out
            }
            LayerOp::SigmoidOutput => unreachable!("sigmoid_output is always last"),
        };
        accumulate(&mut grads[in_slot], &g_in);
    }

    let input = match grads[n].take() {
        Some(g) if want_input => g,
        _ if want_input => vec![0.0; trace.input.len()],
        _ => Vec::new(),
    };
    Ok(Gradients { input, params })
}

fn accumulate(slot: &mut Option<Vec<f64>>, g: &[f64]) {
    match slot {
        Some(acc) => {
            for (a, v) in acc.iter_mut().zip(g) {
                *a += v;
            }
        }
        None => *slot = Some(g.to_vec()),
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Gather form: each input element sums the output positions whose window
/// covers it, so rows can be computed independently.
fn conv2d_input_grad(
    g_out: &[f64],
    in_shape: &[usize],
    out_shape: &[usize],
    c: &Conv2dParams,
    weights: &[f32],
) -> Vec<f64> {
    let (h, w, cin) = (in_shape[0], in_shape[1], in_shape[2]);
    let (oh, ow, cout) = (out_shape[0], out_shape[1], out_shape[2]);
    let (kh, kw, s, p) = (c.kernel_h, c.kernel_w, c.stride, c.padding);
    let mut g_in = vec![0.0f64; h * w * cin];
    g_in.par_chunks_mut(w * cin)
        .enumerate()
        .for_each(|(iy, row)| {
            for ky in 0..kh {
                let ny = iy + p;
                if ny < ky || (ny - ky) % s != 0 {
                    continue;
                }
                let oy = (ny - ky) / s;
                if oy >= oh {
                    continue;
                }
                for ix in 0..w {
                    let px = &mut row[ix * cin..(ix + 1) * cin];
                    for kx in 0..kw {
                        let nx = ix + p;
                        if nx < kx || (nx - kx) % s != 0 {
                            continue;
                        }
                        let ox = (nx - kx) / s;
                        if ox >= ow {
                            continue;
                        }
                        let go = &g_out[(oy * ow + ox) * cout..][..cout];
                        for (co, &g) in go.iter().enumerate() {
                            if g == 0.0 {
                                continue;
                            }
                            let wk = &weights[((co * kh + ky) * kw + kx) * cin..][..cin];
                            for (d, wv) in px.iter_mut().zip(wk) {
                                *d += g * *wv as f64;
                            }
                        }
                    }
                }
            }
        });
    g_in
}

fn conv2d_param_grads(
    x: &[f32],
    g_out: &[f64],
    in_shape: &[usize],
    out_shape: &[usize],
    c: &Conv2dParams,
    pw: &mut [f64],
    pb: &mut [f64],
) {
    let (h, w, cin) = (in_shape[0], in_shape[1], in_shape[2]);
    let (oh, ow, cout) = (out_shape[0], out_shape[1], out_shape[2]);
    let (kh, kw, s, p) = (c.kernel_h, c.kernel_w, c.stride, c.padding);
    let per_out = kh * kw * cin;
    pw.par_chunks_mut(per_out)
        .zip(pb.par_iter_mut())
        .enumerate()
        .for_each(|(co, (wgrad, bgrad))| {
            for oy in 0..oh {
                for ox in 0..ow {
                    let g = g_out[(oy * ow + ox) * cout + co];
                    *bgrad += g;
                    if g == 0.0 {
                        continue;
                    }
                    for ky in 0..kh {
                        let iy = (oy * s + ky) as isize - p as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for kx in 0..kw {
                            let ix = (ox * s + kx) as isize - p as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let px = &x[(iy as usize * w + ix as usize) * cin..][..cin];
                            let dst = &mut wgrad[(ky * kw + kx) * cin..][..cin];
                            for (d, v) in dst.iter_mut().zip(px) {
                                *d += g * *v as f64;
                            }
                        }
                    }
                }
            }
        });
}
