//! HTTP facade over the detector.
//!
//! * `GET  /v1/health`       — `{"status":"ok"}` once the model is loaded, 503 before.
//! * `GET  /v1/model`        — model metadata.
//! * `POST /v1/detect`       — raw image body or multipart; query flags
//!   `saliency`, `force`, `alpha`, `colormap`, `threshold`.
//! * `POST /v1/detect/batch` — multipart with 1..=64 images; per-item errors
//!   are reported in place.
//!
//! Request bodies are never persisted or logged.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Query, Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::detector::{Detector, DetectorConfig, Label, StageTimings};
use crate::engine::{load_model_file, reference, ModelGraph};
use crate::preprocess::encode_png;
use crate::saliency::{explain_detection, Colormap, OverlayConfig};

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8597";
pub const DEFAULT_MAX_BODY: usize = 20 * 1024 * 1024;
pub const MAX_BATCH: usize = 64;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Model container; the zero-weight compact detector when absent.
    pub model_path: Option<PathBuf>,
    pub max_body_bytes: usize,
    pub default_threshold: f64,
    pub default_overlay: OverlayConfig,
    /// Allowed CORS origins; empty allows any origin.
    pub cors_allow: Vec<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: DEFAULT_LISTEN.parse().expect("valid default address"),
            model_path: None,
            max_body_bytes: DEFAULT_MAX_BODY,
            default_threshold: DetectorConfig::default().threshold,
            default_overlay: OverlayConfig::default(),
            cors_allow: Vec::new(),
        }
    }
}

/// Shared handler state. The detector is installed once, after which the
/// service reports ready.
#[derive(Clone)]
pub struct AppState {
    detector: Arc<OnceLock<Detector>>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            detector: Arc::new(OnceLock::new()),
            config: Arc::new(config),
        }
    }

    pub fn with_model(config: ServiceConfig, model: ModelGraph) -> crate::Result<Self> {
        let state = Self::new(config);
        state.install(model)?;
        Ok(state)
    }

    /// Makes the service ready. Later calls are ignored.
    pub fn install(&self, model: ModelGraph) -> crate::Result<()> {
        let cfg = DetectorConfig::with_threshold(self.config.default_threshold)?;
        let detector = Detector::new(Arc::new(model), cfg)?;
        let _ = self.detector.set(detector);
        Ok(())
    }

    pub fn is_ready(&self) -> bool {
        self.detector.get().is_some()
    }

    fn detector(&self) -> Result<&Detector, ApiError> {
        self.detector
            .get()
            .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "model is loading"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ApiErrorBody {
    pub error: String,
    pub status: u16,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn body(&self) -> ApiErrorBody {
        ApiErrorBody {
            error: self.message.clone(),
            status: self.status.as_u16(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

impl From<crate::Error> for ApiError {
    fn from(e: crate::Error) -> Self {
        let status = match e {
            crate::Error::Preprocess(_) => StatusCode::BAD_REQUEST,
            crate::Error::Detector(_) | crate::Error::Saliency(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            crate::Error::Engine(_) | crate::Error::Data(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelInfo {
    pub name: String,
    pub version: u32,
    pub input_shape: Vec<usize>,
    pub n_ai: u64,
    pub n_human: u64,
    pub default_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Timings {
    pub decode_micros: f64,
    pub preprocess_micros: f64,
    pub forward_micros: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saliency_micros: Option<f64>,
    /// Wall-clock time spent on this image inside the handler.
    pub total_micros: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DetectResponse {
    pub probability: f64,
    pub label: Label,
    pub threshold: f64,
    pub model_name: String,
    pub model_version: u32,
    pub timings: Timings,
    /// Base64 PNG, present only when saliency ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlay: Option<String>,
}

/// One entry of a batch response.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum BatchItem {
    Ok(Box<DetectResponse>),
    Err(ApiErrorBody),
}

/// Parsed query flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectParams {
    pub saliency: bool,
    /// Compute the overlay even when the label is human.
    pub force: bool,
    pub threshold: f64,
    pub overlay: OverlayConfig,
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ApiError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(unprocessable(format!(
            "`{key}` must be a boolean, got `{v}`"
        ))),
    }
}

fn unprocessable(msg: impl Into<String>) -> ApiError {
    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, msg)
}

impl DetectParams {
    pub fn parse(
        query: &HashMap<String, String>,
        config: &ServiceConfig,
    ) -> Result<Self, ApiError> {
        let mut p = DetectParams {
            saliency: true,
            force: false,
            threshold: config.default_threshold,
            overlay: config.default_overlay,
        };
        if let Some(v) = query.get("saliency") {
            p.saliency = parse_bool("saliency", v)?;
        }
        if let Some(v) = query.get("force") {
            p.force = parse_bool("force", v)?;
        }
        if let Some(v) = query.get("threshold") {
            p.threshold = v
                .parse()
                .map_err(|_| unprocessable(format!("`threshold` must be a number, got `{v}`")))?;
            DetectorConfig::with_threshold(p.threshold)
                .map_err(|e| unprocessable(e.to_string()))?;
        }
        if let Some(v) = query.get("alpha") {
            p.overlay.alpha = v
                .parse()
                .map_err(|_| unprocessable(format!("`alpha` must be a number, got `{v}`")))?;
        }
        if let Some(v) = query.get("colormap") {
            p.overlay.colormap = v
                .parse::<Colormap>()
                .map_err(|e| unprocessable(e.to_string()))?;
        }
        p.overlay
            .validate()
            .map_err(|e| unprocessable(e.to_string()))?;
        Ok(p)
    }
}

/// Runs one image through detection and, when gated in, the overlay.
pub fn run_detect(
    detector: &Detector,
    image: &[u8],
    params: &DetectParams,
) -> Result<DetectResponse, ApiError> {
    let start = Instant::now();
    if image.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "empty image body"));
    }
    let cfg = DetectorConfig {
        threshold: params.threshold,
        saliency_on_positive_only: !params.force,
    };
    let detector = detector
        .with_config(cfg)
        .map_err(|e| unprocessable(e.to_string()))?;
    let detection = detector.detect(image)?;
    let wants_overlay =
        params.saliency && (params.force || detection.prediction.label == Label::Ai);
    let (prediction, timings, overlay): (_, StageTimings, _) = if wants_overlay {
        let ex = explain_detection(detector.model(), detection, &params.overlay, true)?;
        let png = encode_png(&ex.image).map_err(crate::Error::from)?;
        (
            ex.prediction,
            ex.timings,
            Some(base64::engine::general_purpose::STANDARD.encode(png)),
        )
    } else {
        (detection.prediction, detection.timings, None)
    };
    let meta = detector.model().meta();
    Ok(DetectResponse {
        probability: prediction.probability,
        label: prediction.label,
        threshold: prediction.threshold,
        model_name: meta.name.clone(),
        model_version: meta.format_version,
        timings: Timings {
            decode_micros: timings.decode_micros,
            preprocess_micros: timings.preprocess_micros,
            forward_micros: timings.forward_micros,
            saliency_micros: timings.saliency_micros,
            total_micros: start.elapsed().as_secs_f64() * 1e6,
        },
        overlay,
    })
}

async fn health(State(state): State<AppState>) -> Response {
    if state.is_ready() {
        (StatusCode::OK, Json(serde_json::json!({"status": "ok"}))).into_response()
    } else {
        (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(serde_json::json!({"status": "loading"})),
        )
            .into_response()
    }
}

async fn model_info(State(state): State<AppState>) -> Result<Json<ModelInfo>, ApiError> {
    let detector = state.detector()?;
    let model = detector.model();
    let meta = model.meta();
    Ok(Json(ModelInfo {
        name: meta.name.clone(),
        version: meta.format_version,
        input_shape: model.input_shape().to_vec(),
        n_ai: meta.n_ai,
        n_human: meta.n_human,
        default_threshold: detector.config().threshold,
    }))
}

fn multipart_error(e: axum::extract::multipart::MultipartError) -> ApiError {
    ApiError::new(e.status(), e.body_text())
}

fn is_multipart(req: &Request) -> bool {
    req.headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"))
}

async fn read_parts(req: Request) -> Result<Vec<Bytes>, ApiError> {
    let mut multipart = Multipart::from_request(req, &())
        .await
        .map_err(|e| ApiError::new(e.status(), e.body_text()))?;
    let mut parts = Vec::new();
    while let Some(field) = multipart.next_field().await.map_err(multipart_error)? {
        parts.push(field.bytes().await.map_err(multipart_error)?);
        if parts.len() > MAX_BATCH {
            break;
        }
    }
    Ok(parts)
}

fn query_params(
    query: Result<Query<HashMap<String, String>>, QueryRejection>,
    state: &AppState,
) -> Result<DetectParams, ApiError> {
    let Query(query) = query.map_err(|e| unprocessable(e.body_text()))?;
    DetectParams::parse(&query, &state.config)
}

async fn detect(
    State(state): State<AppState>,
    query: Result<Query<HashMap<String, String>>, QueryRejection>,
    req: Request,
) -> Result<Json<DetectResponse>, ApiError> {
    let detector = state.detector()?.clone();
    let params = query_params(query, &state)?;
    let body =
        if is_multipart(&req) {
            read_parts(req).await?.into_iter().next().ok_or_else(|| {
                ApiError::new(StatusCode::BAD_REQUEST, "multipart body has no parts")
            })?
        } else {
            Bytes::from_request(req, &())
                .await
                .map_err(|e| ApiError::new(e.status(), e.body_text()))?
        };
    let response = tokio::task::spawn_blocking(move || run_detect(&detector, &body, &params))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(response))
}

async fn detect_batch(
    State(state): State<AppState>,
    query: Result<Query<HashMap<String, String>>, QueryRejection>,
    req: Request,
) -> Result<Json<Vec<BatchItem>>, ApiError> {
    let detector = state.detector()?.clone();
    let params = query_params(query, &state)?;
    if !is_multipart(&req) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "batch requests must be multipart/form-data",
        ));
    }
    let parts = read_parts(req).await?;
    if parts.len() > MAX_BATCH {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("batch holds more than {MAX_BATCH} images"),
        ));
    }
    if parts.is_empty() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "batch has no images",
        ));
    }
    let items = tokio::task::spawn_blocking(move || {
        parts
            .par_iter()
            .map(|bytes| match run_detect(&detector, bytes, &params) {
                Ok(r) => BatchItem::Ok(Box::new(r)),
                Err(e) => BatchItem::Err(e.body()),
            })
            .collect::<Vec<_>>()
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(Json(items))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no such route")
}

fn cors_layer(config: &ServiceConfig) -> CorsLayer {
    let origins = if config.cors_allow.is_empty() {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(
            config
                .cors_allow
                .iter()
                .filter_map(|o| HeaderValue::from_str(o).ok())
                .collect::<Vec<_>>(),
        )
    };
    CorsLayer::new()
        .allow_origin(origins)
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers([header::CONTENT_TYPE])
}

pub fn router(state: AppState) -> Router {
    let limit = state.config.max_body_bytes;
    let cors = cors_layer(&state.config);
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/model", get(model_info))
        .route("/v1/detect", post(detect))
        .route("/v1/detect/batch", post(detect_batch))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(limit))
        .layer(cors)
        .with_state(state)
}

pub fn load_configured_model(config: &ServiceConfig) -> crate::Result<ModelGraph> {
    match &config.model_path {
        Some(path) => Ok(load_model_file(path)?),
        None => crate::detector::prior_model(reference::DEFAULT_N_AI, reference::DEFAULT_N_HUMAN),
    }
}

/// Binds, loads the model in the background and serves until Ctrl-C.
/// In-flight requests are drained on shutdown.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let state = AppState::new(config.clone());
    let loader = state.clone();
    tokio::task::spawn_blocking(move || match load_configured_model(&config) {
        Ok(model) => match loader.install(model) {
            Ok(()) => tracing::info!("model ready"),
            Err(e) => tracing::error!(error = %e, "model rejected"),
        },
        Err(e) => tracing::error!(error = %e, "model failed to load"),
    });
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        })
        .await?;
    Ok(())
}
