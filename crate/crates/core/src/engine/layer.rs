use serde::{Deserialize, Serialize};
use std::fmt;

/// The closed set of layer kinds the engine understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Conv2d,
    Relu,
    #[serde(rename = "maxpool2d")]
    MaxPool2d,
    GlobalAvgPool,
    Dense,
    AddSkip,
    SigmoidOutput,
}

impl LayerKind {
    pub const ALL: [LayerKind; 7] = [
        LayerKind::Conv2d,
        LayerKind::Relu,
        LayerKind::MaxPool2d,
        LayerKind::GlobalAvgPool,
        LayerKind::Dense,
        LayerKind::AddSkip,
        LayerKind::SigmoidOutput,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LayerKind::Conv2d => "conv2d",
            LayerKind::Relu => "relu",
            LayerKind::MaxPool2d => "maxpool2d",
            LayerKind::GlobalAvgPool => "global_avg_pool",
            LayerKind::Dense => "dense",
            LayerKind::AddSkip => "add_skip",
            LayerKind::SigmoidOutput => "sigmoid_output",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conv2dParams {
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub stride: usize,
    pub padding: usize,
    pub in_channels: usize,
    pub out_channels: usize,
}

impl Conv2dParams {
    pub fn weight_count(&self) -> usize {
        self.out_channels * self.kernel_h * self.kernel_w * self.in_channels
    }

    /// Output extent along one spatial axis, or `None` when the kernel does
    /// not fit.
    pub fn output_extent(&self, input: usize, kernel: usize) -> Option<usize> {
        let padded = input + 2 * self.padding;
        if self.stride == 0 || kernel == 0 || padded < kernel {
            return None;
        }
        Some((padded - kernel) / self.stride + 1)
    }
}

/// Layer operation with its typed hyperparameters.
///
/// Conv weights are laid out `[out][kh][kw][in]`, dense weights `[out][in]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerOp {
    Conv2d(Conv2dParams),
    Relu,
    MaxPool2d {
        size: usize,
        stride: usize,
    },
    GlobalAvgPool,
    Dense {
        in_features: usize,
        out_features: usize,
    },
    /// Adds the output of layer `source` to this layer's input.
    AddSkip {
        source: usize,
    },
    SigmoidOutput,
}

impl LayerOp {
    pub fn kind(&self) -> LayerKind {
        match self {
            LayerOp::Conv2d(_) => LayerKind::Conv2d,
            LayerOp::Relu => LayerKind::Relu,
            LayerOp::MaxPool2d { .. } => LayerKind::MaxPool2d,
            LayerOp::GlobalAvgPool => LayerKind::GlobalAvgPool,
            LayerOp::Dense { .. } => LayerKind::Dense,
            LayerOp::AddSkip { .. } => LayerKind::AddSkip,
            LayerOp::SigmoidOutput => LayerKind::SigmoidOutput,
        }
    }

    /// (weight count, bias count) implied by the hyperparameters.
    pub fn param_counts(&self) -> (usize, usize) {
        match *self {
            LayerOp::Conv2d(c) => (c.weight_count(), c.out_channels),
            LayerOp::Dense {
                in_features,
                out_features,
            } => (in_features * out_features, out_features),
            _ => (0, 0),
        }
    }

    pub fn has_params(&self) -> bool {
        matches!(self, LayerOp::Conv2d(_) | LayerOp::Dense { .. })
    }

    pub(crate) fn to_hyperparams(self) -> Hyperparams {
        let mut h = Hyperparams::default();
        match self {
            LayerOp::Conv2d(c) => {
                h.kernel_h = Some(c.kernel_h);
                h.kernel_w = Some(c.kernel_w);
                h.stride = Some(c.stride);
                h.padding = Some(c.padding);
                h.in_channels = Some(c.in_channels);
                h.out_channels = Some(c.out_channels);
            }
            LayerOp::MaxPool2d { size, stride } => {
                h.pool_size = Some(size);
                h.stride = Some(stride);
            }
            LayerOp::Dense {
                in_features,
                out_features,
            } => {
                h.in_features = Some(in_features);
                h.out_features = Some(out_features);
            }
            LayerOp::AddSkip { source } => h.source = Some(source),
            LayerOp::Relu | LayerOp::GlobalAvgPool | LayerOp::SigmoidOutput => {}
        }
        h
    }

    pub(crate) fn from_hyperparams(kind: LayerKind, h: &Hyperparams) -> Result<Self, String> {
        fn need(v: Option<usize>, name: &str) -> Result<usize, String> {
            v.ok_or_else(|| format!("missing hyperparameter `{name}`"))
        }
        Ok(match kind {
            LayerKind::Conv2d => LayerOp::Conv2d(Conv2dParams {
                kernel_h: need(h.kernel_h, "kernel_h")?,
                kernel_w: need(h.kernel_w, "kernel_w")?,
                stride: need(h.stride, "stride")?,
                padding: need(h.padding, "padding")?,
                in_channels: need(h.in_channels, "in_channels")?,
                out_channels: need(h.out_channels, "out_channels")?,
            }),
            LayerKind::Relu => LayerOp::Relu,
            LayerKind::MaxPool2d => LayerOp::MaxPool2d {
                size: need(h.pool_size, "pool_size")?,
                stride: need(h.stride, "stride")?,
            },
            LayerKind::GlobalAvgPool => LayerOp::GlobalAvgPool,
            LayerKind::Dense => LayerOp::Dense {
                in_features: need(h.in_features, "in_features")?,
                out_features: need(h.out_features, "out_features")?,
            },
            LayerKind::AddSkip => LayerOp::AddSkip {
                source: need(h.source, "source")?,
            },
            LayerKind::SigmoidOutput => LayerOp::SigmoidOutput,
        })
    }
}

/// Offset/length pair into the model's flat weight blob, in `f32` elements.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParamSlice {
    pub offset: usize,
    pub len: usize,
}

impl ParamSlice {
    pub fn new(offset: usize, len: usize) -> Self {
        Self { offset, len }
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }

    pub fn end(&self) -> usize {
        self.offset + self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub op: LayerOp,
    pub weight: ParamSlice,
    pub bias: ParamSlice,
}

impl LayerSpec {
    pub fn new(op: LayerOp, weight: ParamSlice, bias: ParamSlice) -> Self {
        Self { op, weight, bias }
    }

    /// A layer without parameters.
    pub fn bare(op: LayerOp) -> Self {
        Self::new(op, ParamSlice::default(), ParamSlice::default())
    }

    pub fn kind(&self) -> LayerKind {
        self.op.kind()
    }
}

/// Wire form of a layer's hyperparameters. Only the keys relevant to the
/// layer kind are present; field order fixes the serialized byte layout.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct Hyperparams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_h: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_w: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_channels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_channels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_features: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_features: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
}
