use crate::datakit::DataError;
use crate::detector::DetectorError;
use crate::engine::EngineError;
use crate::preprocess::PreprocessError;
use crate::saliency::SaliencyError;

/// Crate-wide error, wrapping the per-module error types.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Saliency(#[from] SaliencyError),
    #[error(transparent)]
    Data(#[from] DataError),
}
