//! Portable model container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! b"PVE1" | u32 header_len | header JSON (UTF-8) | f32 weight blob | u32 CRC32
//! ```
//!
//! The CRC covers every byte before it.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::graph::{ModelGraph, ModelMeta};
use super::layer::{Hyperparams, LayerKind, LayerOp, LayerSpec, ParamSlice};
use super::EngineError;

pub const MAGIC: &[u8; 4] = b"PVE1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format_version: u32,
    name: String,
    input_shape: Vec<usize>,
    n_ai: u64,
    n_human: u64,
    layers: Vec<HeaderLayer>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLayer {
    kind: String,
    hyperparams: Hyperparams,
    weight_offset: usize,
    weight_len: usize,
    bias_offset: usize,
    bias_len: usize,
}

/// Serializes `model` into container bytes.
pub fn save_model(model: &ModelGraph) -> Vec<u8> {
    let meta = model.meta();
    let header = Header {
        format_version: meta.format_version,
        name: meta.name.clone(),
        input_shape: model.input_shape().to_vec(),
        n_ai: meta.n_ai,
        n_human: meta.n_human,
        layers: model
            .layers()
            .iter()
            .map(|l| HeaderLayer {
                kind: l.kind().as_str().to_string(),
                hyperparams: l.op.to_hyperparams(),
                weight_offset: l.weight.offset,
                weight_len: l.weight.len,
                bias_offset: l.bias.offset,
                bias_len: l.bias.len,
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(12 + json.len() + 4 * model.weights().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for w in model.weights() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Parses and validates container bytes.
pub fn load_model(bytes: &[u8]) -> Result<ModelGraph, EngineError> {
    if bytes.len() < 12 {
        return Err(EngineError::Malformed(format!(
            "container is {} bytes, shorter than the fixed framing",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(EngineError::Malformed("bad magic, expected PVE1".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(EngineError::ChecksumMismatch { stored, computed });
    }
    let header_len = u32::from_le_bytes(body[4..8].try_into().unwrap()) as usize;
    let header_end = 8usize
        .checked_add(header_len)
        .filter(|&e| e <= body.len())
        .ok_or_else(|| {
            EngineError::Malformed(format!("header length {header_len} overruns container"))
        })?;
    let header: Header = serde_json::from_slice(&body[8..header_end])
        .map_err(|e| EngineError::Malformed(format!("header JSON: {e}")))?;

    let blob = &body[header_end..];
    if blob.len() % 4 != 0 {
        return Err(EngineError::Malformed(format!(
            "weight blob of {} bytes is not a whole number of f32 values",
            blob.len()
        )));
    }
    let weights: Vec<f32> = blob
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let mut layers = Vec::with_capacity(header.layers.len());
    for (i, hl) in header.layers.iter().enumerate() {
        let kind = LayerKind::parse(&hl.kind).ok_or_else(|| EngineError::UnsupportedLayer {
            layer: i,
            kind: hl.kind.clone(),
        })?;
        let op = LayerOp::from_hyperparams(kind, &hl.hyperparams)
            .map_err(|reason| EngineError::InvalidLayer { layer: i, reason })?;
        layers.push(LayerSpec::new(
            op,
            ParamSlice::new(hl.weight_offset, hl.weight_len),
            ParamSlice::new(hl.bias_offset, hl.bias_len),
        ));
    }
    let meta = ModelMeta {
        name: header.name,
        format_version: header.format_version,
        n_ai: header.n_ai,
        n_human: header.n_human,
    };
    ModelGraph::new(meta, header.input_shape, layers, weights)
}

pub fn load_model_file(path: impl AsRef<Path>) -> Result<ModelGraph, EngineError> {
    let path = path.as_ref();
    let bytes =
        std::fs::read(path).map_err(|e| EngineError::Io(format!("{}: {e}", path.display())))?;
    load_model(&bytes)
}

pub fn save_model_file(model: &ModelGraph, path: impl AsRef<Path>) -> Result<(), EngineError> {
    let path = path.as_ref();
    std::fs::write(path, save_model(model))
        .map_err(|e| EngineError::Io(format!("{}: {e}", path.display())))
}
