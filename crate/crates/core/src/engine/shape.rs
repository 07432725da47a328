use super::layer::{LayerOp, LayerSpec};
use super::EngineError;

pub type Shape = Vec<usize>;

fn fail(layer: usize, reason: impl Into<String>) -> EngineError {
    EngineError::ShapeInference {
        layer,
        reason: reason.into(),
    }
}

fn spatial(layer: usize, shape: &[usize]) -> Result<(usize, usize, usize), EngineError> {
    match *shape {
        [h, w, c] => Ok((h, w, c)),
        _ => Err(fail(
            layer,
            format!("expected a [h, w, c] input, got {shape:?}"),
        )),
    }
}

/// Runs shape inference over `layers` starting from `input_shape`, returning
/// each layer's output shape. Fails at the first inconsistent layer.
pub fn infer_shapes(
    layers: &[LayerSpec],
    input_shape: &[usize],
) -> Result<Vec<Shape>, EngineError> {
    if input_shape.is_empty() || input_shape.contains(&0) {
        return Err(fail(
            0,
            format!("input shape {input_shape:?} has empty dims"),
        ));
    }
    let mut shapes: Vec<Shape> = Vec::with_capacity(layers.len());
    for (i, layer) in layers.iter().enumerate() {
        let input: &[usize] = if i == 0 { input_shape } else { &shapes[i - 1] };
        let out = match layer.op {
            LayerOp::Conv2d(c) => {
                let (h, w, ch) = spatial(i, input)?;
                if ch != c.in_channels {
                    return Err(fail(
                        i,
                        format!("conv2d expects {} input channels, got {ch}", c.in_channels),
                    ));
                }
                if c.out_channels == 0 {
                    return Err(fail(i, "conv2d has zero output channels"));
                }
                let oh = c.output_extent(h, c.kernel_h);
                let ow = c.output_extent(w, c.kernel_w);
                match (oh, ow) {
                    (Some(oh), Some(ow)) if oh > 0 && ow > 0 => vec![oh, ow, c.out_channels],
                    _ => {
                        return Err(fail(
                            i,
                            format!(
                            "conv2d {}x{} stride {} pad {} yields non-positive output on {h}x{w}",
                            c.kernel_h, c.kernel_w, c.stride, c.padding
                        ),
                        ))
                    }
                }
            }
            LayerOp::Relu => input.to_vec(),
            LayerOp::MaxPool2d { size, stride } => {
                let (h, w, ch) = spatial(i, input)?;
                if size == 0 || stride == 0 || h < size || w < size {
                    return Err(fail(
                        i,
                        format!(
                            "maxpool {size} stride {stride} yields non-positive output on {h}x{w}"
                        ),
                    ));
                }
                vec![(h - size) / stride + 1, (w - size) / stride + 1, ch]
            }
            LayerOp::GlobalAvgPool => {
                let (_, _, ch) = spatial(i, input)?;
                vec![ch]
            }
            LayerOp::Dense {
                in_features,
                out_features,
            } => {
                let n: usize = input.iter().product();
                if n != in_features {
                    return Err(fail(
                        i,
                        format!("dense expects {in_features} inputs, got {n}"),
                    ));
                }
                if out_features == 0 {
                    return Err(fail(i, "dense has zero outputs"));
                }
                vec![out_features]
            }
            LayerOp::AddSkip { source } => {
                if source >= i {
                    return Err(fail(
                        i,
                        format!("add_skip source {source} is not an earlier layer"),
                    ));
                }
                if shapes[source] != input {
                    return Err(fail(
                        i,
                        format!(
                            "add_skip source {source} has shape {:?}, input is {input:?}",
                            shapes[source]
                        ),
                    ));
                }
                input.to_vec()
            }
            LayerOp::SigmoidOutput => {
                if input.iter().product::<usize>() != 1 {
                    return Err(fail(
                        i,
                        format!("sigmoid_output needs a single logit, got {input:?}"),
                    ));
                }
                vec![1]
            }
        };
        shapes.push(out);
    }
    Ok(shapes)
}
