//! Vanilla-gradient saliency and heat-map overlays.
//!
//! The map is `max_c |∂logit/∂x(i, j, c)|`, min-max normalized per image,
//! computed at model resolution and bilinearly resampled to the original
//! image size before colorizing and alpha-blending.

mod tables;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::detector::{micros, Detection, Detector, Label, Prediction, StageTimings};
use crate::engine::{backward_to_input, forward, ModelGraph, TensorF32};
use crate::preprocess::{bilinear_taps, ImageTensor, RawImage};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SaliencyError {
    #[error("unknown colormap `{0}` (expected inferno, jet or grayscale)")]
    UnknownColormap(String),
    #[error("alpha must lie in [0,1], got {0}")]
    InvalidAlpha(f64),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("saliency map needs a [h, w, c] gradient, got {0:?}")]
    GradientShape(Vec<usize>),
}

/// Per-pixel attribution in [0,1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl SaliencyMap {
    /// Values are clamped into [0,1].
    pub fn new(width: usize, height: usize, mut values: Vec<f32>) -> Option<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return None;
        }
        for v in &mut values {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Some(Self {
            width,
            height,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, value: f32) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("non-empty")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }

    /// Index of the first maximal value.
    pub fn argmax(&self) -> usize {
        first_argmax(&self.values)
    }
}

pub(crate) fn first_argmax(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colormap {
    #[default]
    Inferno,
    Jet,
    Grayscale,
}

impl Colormap {
    pub fn as_str(self) -> &'static str {
        match self {
            Colormap::Inferno => "inferno",
            Colormap::Jet => "jet",
            Colormap::Grayscale => "grayscale",
        }
    }

    fn entry(self, i: usize) -> [u8; 3] {
        match self {
            Colormap::Inferno => tables::INFERNO[i],
            Colormap::Jet => tables::JET[i],
            Colormap::Grayscale => [i as u8; 3],
        }
    }

    /// Colour for `v` in [0,1], linearly interpolated between the two
    /// neighbouring table entries and rounded half up.
    pub fn lookup(self, v: f32) -> [u8; 3] {
        let pos = v.clamp(0.0, 1.0) as f64 * 255.0;
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(255);
        let frac = pos - lo as f64;
        let (a, b) = (self.entry(lo), self.entry(hi));
        let mut out = [0u8; 3];
        for c in 0..3 {
            let v = a[c] as f64 * (1.0 - frac) + b[c] as f64 * frac;
            out[c] = (v + 0.5).floor() as u8;
        }
        out
    }
}

impl fmt::Display for Colormap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Colormap {
    type Err = SaliencyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inferno" => Ok(Colormap::Inferno),
            "jet" => Ok(Colormap::Jet),
            "grayscale" | "gray" => Ok(Colormap::Grayscale),
            other => Err(SaliencyError::UnknownColormap(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayConfig {
    pub alpha: f64,
    pub colormap: Colormap,
}

impl Default for OverlayConfig {
    fn default() -> Self {
        Self {
            alpha: 0.45,
            colormap: Colormap::Inferno,
        }
    }
}

impl OverlayConfig {
    pub fn new(alpha: f64, colormap: Colormap) -> Result<Self, SaliencyError> {
        let cfg = Self { alpha, colormap };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SaliencyError> {
        if (0.0..=1.0).contains(&self.alpha) {
            Ok(())
        } else {
            Err(SaliencyError::InvalidAlpha(self.alpha))
        }
    }
}

/// Reduces an input gradient to a saliency map: channel-wise max of absolute
/// values, then min-max normalization. An all-zero gradient gives an
/// all-zero map; a constant non-zero one gives all ones.
pub fn map_from_gradient(grad: &TensorF32) -> Result<SaliencyMap, SaliencyError> {
    let &[h, w, c] = grad.shape() else {
        return Err(SaliencyError::GradientShape(grad.shape().to_vec()));
    };
    let raw: Vec<f32> = grad
        .data()
        .chunks_exact(c)
        .map(|px| px.iter().fold(0.0f32, |m, g| m.max(g.abs())))
        .collect();
    Ok(SaliencyMap {
        width: w,
        height: h,
        values: min_max(&raw),
    })
}

fn min_max(raw: &[f32]) -> Vec<f32> {
    let (lo, hi) = raw
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi <= 0.0 {
        return vec![0.0; raw.len()];
    }
    if hi == lo {
        return vec![1.0; raw.len()];
    }
    let span = hi as f64 - lo as f64;
    raw.iter()
        .map(|&v| {
            let n = ((v as f64 - lo as f64) / span) as f32;
            // keep strict order below the maximum after rounding to f32
            if n >= 1.0 && v < hi {
                1.0 - f32::EPSILON / 2.0
            } else {
                n
            }
        })
        .collect()
}

/// Saliency of the logit with respect to the preprocessed input, at model
/// resolution.
pub fn vanilla_gradient(
    model: &ModelGraph,
    input: &ImageTensor,
) -> Result<SaliencyMap, crate::Error> {
    let trace = forward(model, input.tensor())?;
    let grad = backward_to_input(model, &trace)?;
    Ok(map_from_gradient(&grad)?)
}

/// Bilinear resample (half-pixel centres), re-clamped to [0,1].
pub fn upscale_map(map: &SaliencyMap, target_w: usize, target_h: usize) -> SaliencyMap {
    assert!(
        target_w >= 1 && target_h >= 1,
        "target dimensions must be positive"
    );
    if map.width == target_w && map.height == target_h {
        return map.clone();
    }
    let xs = bilinear_taps(map.width, target_w);
    let ys = bilinear_taps(map.height, target_h);
    let mut values = Vec::with_capacity(target_w * target_h);
    for ty in &ys {
        let r0 = &map.values[ty.lo * map.width..];
        let r1 = &map.values[ty.hi * map.width..];
        for tx in &xs {
            let top = r0[tx.lo] as f64 * (1.0 - tx.frac) + r0[tx.hi] as f64 * tx.frac;
            let bot = r1[tx.lo] as f64 * (1.0 - tx.frac) + r1[tx.hi] as f64 * tx.frac;
            let v = top * (1.0 - ty.frac) + bot * ty.frac;
            values.push((v as f32).clamp(0.0, 1.0));
        }
    }
    SaliencyMap {
        width: target_w,
        height: target_h,
        values,
    }
}

pub fn colorize(map: &SaliencyMap, colormap: Colormap) -> RawImage {
    let mut pixels = Vec::with_capacity(map.values.len() * 3);
    for &v in &map.values {
        pixels.extend_from_slice(&colormap.lookup(v));
    }
    RawImage::new(map.width, map.height, pixels).expect("map dims are positive")
}

/// Per channel `round((1 − alpha)·original + alpha·heat)`.
pub fn blend(original: &RawImage, heat: &RawImage, alpha: f64) -> Result<RawImage, SaliencyError> {
    if (original.width(), original.height()) != (heat.width(), heat.height()) {
        return Err(SaliencyError::DimensionMismatch(
            original.width(),
            original.height(),
            heat.width(),
            heat.height(),
        ));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SaliencyError::InvalidAlpha(alpha));
    }
    let pixels = original
        .pixels()
        .iter()
        .zip(heat.pixels())
        .map(|(&o, &h)| ((1.0 - alpha) * o as f64 + alpha * h as f64).round() as u8)
        .collect();
    Ok(RawImage::new(original.width(), original.height(), pixels).expect("same dims"))
}

/// Result of [`explain`]: the image to display plus the detection outcome.
#[derive(Debug, Clone)]
pub struct Explanation {
    /// Overlay when saliency ran, otherwise the decoded original.
    pub image: RawImage,
    pub prediction: Prediction,
    pub timings: StageTimings,
    /// Saliency at model resolution, present when computed.
    pub saliency: Option<SaliencyMap>,
}

impl Explanation {
    pub fn overlaid(&self) -> bool {
        self.saliency.is_some()
    }
}

/// Full pipeline for one image: detect, and when the gating rule allows,
/// compute saliency, upscale to the original size, colorize and blend.
pub fn explain(
    detector: &Detector,
    image_bytes: &[u8],
    config: &OverlayConfig,
) -> crate::Result<Explanation> {
    let detection = detector.detect(image_bytes)?;
    let force = !detector.config().saliency_on_positive_only;
    explain_detection(detector.model(), detection, config, force)
}

/// Overlay stage for an existing detection. Saliency runs when the label is
/// ai or `force` is set.
pub fn explain_detection(
    model: &ModelGraph,
    detection: Detection,
    config: &OverlayConfig,
    force: bool,
) -> crate::Result<Explanation> {
    config.validate()?;
    let Detection {
        prediction,
        original,
        trace,
        mut timings,
        ..
    } = detection;
    if prediction.label != Label::Ai && !force {
        return Ok(Explanation {
            image: original,
            prediction,
            timings,
            saliency: None,
        });
    }
    let t = Instant::now();
    let grad = backward_to_input(model, &trace).map_err(crate::Error::from)?;
    let map = map_from_gradient(&grad)?;
    let scaled = upscale_map(&map, original.width(), original.height());
    let heat = colorize(&scaled, config.colormap);
    let image = blend(&original, &heat, config.alpha)?;
    timings.saliency_micros = Some(micros(t));
    Ok(Explanation {
        image,
        prediction,
        timings,
        saliency: Some(map),
    })
}
