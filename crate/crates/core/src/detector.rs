//! Binary AI-vs-human classification over the engine, with log-ratio
//! output-bias initialization and an adjustable decision threshold.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{forward, reference, EngineError, ForwardTrace, ModelGraph};
use crate::preprocess::{self, ImageTensor, RawImage};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectorError {
    #[error("class counts must be positive, got n_ai={n_ai}, n_human={n_human}")]
    NonPositiveCount { n_ai: u64, n_human: u64 },
    #[error("threshold must lie strictly between 0 and 1, got {0}")]
    InvalidThreshold(f64),
    #[error("model input must be [256, 256, 3], got {0:?}")]
    InputShape(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Ai,
    Human,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Ai => "ai",
            Label::Human => "human",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ai" => Ok(Label::Ai),
            "human" => Ok(Label::Human),
            other => Err(format!("unknown label `{other}` (expected ai or human)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Probability of the "ai" class.
    pub probability: f64,
    pub label: Label,
    pub threshold: f64,
    /// Wall-clock preprocess + forward time; decoding is excluded.
    pub inference_micros: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub threshold: f64,
    /// Only compute saliency for images labelled ai.
    pub saliency_on_positive_only: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            saliency_on_positive_only: true,
        }
    }
}

impl DetectorConfig {
    pub fn with_threshold(threshold: f64) -> Result<Self, DetectorError> {
        let cfg = Self {
            threshold,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), DetectorError> {
        if self.threshold > 0.0 && self.threshold < 1.0 {
            Ok(())
        } else {
            Err(DetectorError::InvalidThreshold(self.threshold))
        }
    }
}

/// Log-ratio output bias `ln(n_ai / n_human)`. Installed on a zero-weight
/// network, the initial prediction equals the class prior
/// `n_ai / (n_ai + n_human)`.
pub fn init_output_bias(n_ai: u64, n_human: u64) -> Result<f64, DetectorError> {
    if n_ai == 0 || n_human == 0 {
        return Err(DetectorError::NonPositiveCount { n_ai, n_human });
    }
    // Difference of logs keeps the result exactly antisymmetric in its arguments.
    Ok((n_ai as f64).ln() - (n_human as f64).ln())
}

/// Zero-weight compact detector carrying the log-ratio output bias: it
/// predicts the class prior for every image.
pub fn prior_model(n_ai: u64, n_human: u64) -> crate::Result<ModelGraph> {
    let bias = init_output_bias(n_ai, n_human)?;
    let mut model = reference::compact_detector(n_ai, n_human)?;
    model.set_output_bias(bias as f32)?;
    Ok(model)
}

/// `ai` iff `probability >= threshold`.
pub fn classify(probability: f64, config: &DetectorConfig) -> Label {
    if probability >= config.threshold {
        Label::Ai
    } else {
        Label::Human
    }
}

/// Per-stage wall-clock timings in microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub decode_micros: f64,
    pub preprocess_micros: f64,
    pub forward_micros: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub saliency_micros: Option<f64>,
}

/// Everything one detection produced, kept so saliency can reuse the trace.
#[derive(Debug, Clone)]
pub struct Detection {
    pub prediction: Prediction,
    pub original: RawImage,
    pub input: ImageTensor,
    pub trace: ForwardTrace,
    pub timings: StageTimings,
}

pub(crate) fn micros(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e6
}

/// A model plus decision configuration. Cheap to clone; the model is shared.
#[derive(Debug, Clone)]
pub struct Detector {
    model: Arc<ModelGraph>,
    config: DetectorConfig,
}

impl Detector {
    pub fn new(model: Arc<ModelGraph>, config: DetectorConfig) -> Result<Self, DetectorError> {
        config.validate()?;
        if model.input_shape() != reference::input_shape().as_slice() {
            return Err(DetectorError::InputShape(model.input_shape().to_vec()));
        }
        Ok(Self { model, config })
    }

    pub fn model(&self) -> &Arc<ModelGraph> {
        &self.model
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn with_config(&self, config: DetectorConfig) -> Result<Self, DetectorError> {
        config.validate()?;
        Ok(Self {
            model: Arc::clone(&self.model),
            config,
        })
    }

    /// Decode, preprocess, run the network and classify.
    pub fn detect(&self, image_bytes: &[u8]) -> crate::Result<Detection> {
        let t = Instant::now();
        let original = preprocess::decode_image(image_bytes)?;
        let decode_micros = micros(t);
        let mut d = self.detect_raw(original)?;
        d.timings.decode_micros = decode_micros;
        Ok(d)
    }

    /// Same as [`Detector::detect`] for an already-decoded image.
    pub fn detect_raw(&self, original: RawImage) -> crate::Result<Detection> {
        let t = Instant::now();
        let input = preprocess::prepare(&original);
        let preprocess_micros = micros(t);
        let t = Instant::now();
        let trace = forward(&self.model, input.tensor())?;
        let forward_micros = micros(t);
        let probability = trace.probability();
        let prediction = Prediction {
            probability,
            label: classify(probability, &self.config),
            threshold: self.config.threshold,
            inference_micros: preprocess_micros + forward_micros,
        };
        Ok(Detection {
            prediction,
            original,
            input,
            trace,
            timings: StageTimings {
                decode_micros: 0.0,
                preprocess_micros,
                forward_micros,
                saliency_micros: None,
            },
        })
    }

    pub fn predict(&self, image_bytes: &[u8]) -> crate::Result<Prediction> {
        Ok(self.detect(image_bytes)?.prediction)
    }

    /// Probability for an already-preprocessed input.
    pub fn probability(&self, input: &ImageTensor) -> Result<f64, EngineError> {
        Ok(forward(&self.model, input.tensor())?.probability())
    }
}

/// Convenience wrapper: predict with the default configuration.
pub fn predict(model: Arc<ModelGraph>, image_bytes: &[u8]) -> crate::Result<Prediction> {
    Detector::new(model, DetectorConfig::default())?.predict(image_bytes)
}
