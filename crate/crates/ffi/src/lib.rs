//! C ABI over the pve detector.
//!
//! Every function returns a [`PveStatus`]; on failure a description is
//! available from [`pve_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Panics never
//! cross the boundary: they are reported as `PVE_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use pve::detector::{init_output_bias, prior_model, Detector, DetectorConfig, Label, Prediction};
use pve::engine::{load_model, load_model_file, ModelGraph};
use pve::preprocess::RawImage;
use pve::saliency::{explain, Colormap, OverlayConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PveStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    InvalidModel = 4,
    InvalidImage = 5,
    Inference = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PveLabel {
    Human = 0,
    Ai = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PveColormap {
    Inferno = 0,
    Jet = 1,
    Grayscale = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvePrediction {
    /// Probability of the ai class.
    pub probability: f64,
    pub label: PveLabel,
    pub threshold: f64,
    /// Preprocess + forward wall time.
    pub inference_micros: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PveModelInfo {
    pub format_version: u32,
    pub n_ai: u64,
    pub n_human: u64,
    pub param_count: usize,
    pub input_height: usize,
    pub input_width: usize,
    pub input_channels: usize,
}

/// Loaded detector.
pub struct PveModel {
    detector: Detector,
    name: CString,
}

/// RGB8 overlay image, row-major.
pub struct PveOverlay {
    image: RawImage,
}

struct Failure(PveStatus, String);

type FfiResult = Result<(), Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult) -> PveStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PveStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            PveStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PveStatus::NullPointer, format!("{what} is null"))
}

fn classify_error(e: pve::Error) -> Failure {
    let status = match &e {
        pve::Error::Preprocess(_) => PveStatus::InvalidImage,
        pve::Error::Detector(_) | pve::Error::Saliency(_) => PveStatus::InvalidArgument,
        pve::Error::Engine(_) => PveStatus::Inference,
        pve::Error::Data(_) => PveStatus::Io,
    };
    Failure(status, e.to_string())
}

unsafe fn bytes<'a>(data: *const u8, len: usize) -> Result<&'a [u8], Failure> {
    if data.is_null() {
        return Err(null("data"));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

fn new_model(model: ModelGraph, out: *mut *mut PveModel) -> FfiResult {
    let name = CString::new(model.name().replace('\0', " ")).expect("interior NULs removed");
    let detector = Detector::new(Arc::new(model), DetectorConfig::default())
        .map_err(|e| Failure(PveStatus::InvalidModel, e.to_string()))?;
    let handle = Box::new(PveModel { detector, name });
    // SAFETY: caller checked `out` for null.
    unsafe { *out = Box::into_raw(handle) };
    Ok(())
}

fn prediction_out(p: &Prediction) -> PvePrediction {
    PvePrediction {
        probability: p.probability,
        label: match p.label {
            Label::Ai => PveLabel::Ai,
            Label::Human => PveLabel::Human,
        },
        threshold: p.threshold,
        inference_micros: p.inference_micros,
    }
}

fn detector_with(model: &PveModel, threshold: f64, force: bool) -> Result<Detector, Failure> {
    let cfg = DetectorConfig {
        threshold,
        saliency_on_positive_only: !force,
    };
    model
        .detector
        .with_config(cfg)
        .map_err(|e| Failure(PveStatus::InvalidArgument, e.to_string()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pve_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL after a
/// successful call. Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn pve_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `ln(n_ai) - ln(n_human)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pve_init_output_bias(n_ai: u64, n_human: u64, out: *mut f64) -> PveStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let b = init_output_bias(n_ai, n_human)
            .map_err(|e| Failure(PveStatus::InvalidArgument, e.to_string()))?;
        *out = b;
        Ok(())
    })
}

/// Loads a model container from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pve_model_load_file(
    path: *const c_char,
    out: *mut *mut PveModel,
) -> PveStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(PveStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let model = load_model_file(path).map_err(|e| {
            let status = match e {
                pve::engine::EngineError::Io(_) => PveStatus::Io,
                _ => PveStatus::InvalidModel,
            };
            Failure(status, e.to_string())
        })?;
        new_model(model, out)
    })
}

/// Loads a model container from memory.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pve_model_load_bytes(
    data: *const u8,
    len: usize,
    out: *mut *mut PveModel,
) -> PveStatus {
    guard(|| {
        let data = bytes(data, len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let model =
            load_model(data).map_err(|e| Failure(PveStatus::InvalidModel, e.to_string()))?;
        new_model(model, out)
    })
}

/// Zero-weight compact detector whose prediction is the class prior.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pve_model_prior(
    n_ai: u64,
    n_human: u64,
    out: *mut *mut PveModel,
) -> PveStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = prior_model(n_ai, n_human).map_err(classify_error)?;
        new_model(model, out)
    })
}

/// # Safety
/// `model` must be NULL or a handle from a `pve_model_*` constructor that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn pve_model_free(model: *mut PveModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Model name, valid for the lifetime of the handle. NULL for a NULL handle.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pve_model_name(model: *const PveModel) -> *const c_char {
    model.as_ref().map_or(ptr::null(), |m| m.name.as_ptr())
}

/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pve_model_info(
    model: *const PveModel,
    out: *mut PveModelInfo,
) -> PveStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let graph = model.detector.model();
        let meta = graph.meta();
        let shape = graph.input_shape();
        *out = PveModelInfo {
            format_version: meta.format_version,
            n_ai: meta.n_ai,
            n_human: meta.n_human,
            param_count: graph.param_count(),
            input_height: shape[0],
            input_width: shape[1],
            input_channels: shape[2],
        };
        Ok(())
    })
}

/// Classifies an encoded PNG or JPEG image.
///
/// # Safety
/// `model` must be a live handle, `data` must point to `len` readable bytes
/// and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pve_detect(
    model: *const PveModel,
    data: *const u8,
    len: usize,
    threshold: f64,
    out: *mut PvePrediction,
) -> PveStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let data = bytes(data, len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let detector = detector_with(model, threshold, false)?;
        let p = detector.predict(data).map_err(classify_error)?;
        *out = prediction_out(&p);
        Ok(())
    })
}

/// Classifies an image and, when it is labelled ai or `force` is set, builds
/// a saliency overlay at the original resolution. `*out_overlay` is set to
/// NULL when no overlay was made. `colormap` is a [`PveColormap`] value.
///
/// # Safety
/// `model` must be a live handle, `data` must point to `len` readable bytes;
/// `out_prediction` and `out_overlay` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pve_explain(
    model: *const PveModel,
    data: *const u8,
    len: usize,
    threshold: f64,
    alpha: f64,
    colormap: u32,
    force: bool,
    out_prediction: *mut PvePrediction,
    out_overlay: *mut *mut PveOverlay,
) -> PveStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let data = bytes(data, len)?;
        if out_prediction.is_null() {
            return Err(null("out_prediction"));
        }
        if out_overlay.is_null() {
            return Err(null("out_overlay"));
        }
        let colormap = match colormap {
            c if c == PveColormap::Inferno as u32 => Colormap::Inferno,
            c if c == PveColormap::Jet as u32 => Colormap::Jet,
            c if c == PveColormap::Grayscale as u32 => Colormap::Grayscale,
            other => {
                return Err(Failure(
                    PveStatus::InvalidArgument,
                    format!("unknown colormap {other}"),
                ))
            }
        };
        let overlay_cfg = OverlayConfig::new(alpha, colormap)
            .map_err(|e| Failure(PveStatus::InvalidArgument, e.to_string()))?;
        let detector = detector_with(model, threshold, force)?;
        let ex = explain(&detector, data, &overlay_cfg).map_err(classify_error)?;
        *out_prediction = prediction_out(&ex.prediction);
        *out_overlay = if ex.overlaid() {
            Box::into_raw(Box::new(PveOverlay { image: ex.image }))
        } else {
            ptr::null_mut()
        };
        Ok(())
    })
}

/// # Safety
/// `overlay` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pve_overlay_width(overlay: *const PveOverlay) -> usize {
    overlay.as_ref().map_or(0, |o| o.image.width())
}

/// # Safety
/// `overlay` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pve_overlay_height(overlay: *const PveOverlay) -> usize {
    overlay.as_ref().map_or(0, |o| o.image.height())
}

/// RGB8 pixels, `width * height * 3` bytes, valid until the handle is freed.
///
/// # Safety
/// `overlay` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pve_overlay_pixels(overlay: *const PveOverlay) -> *const u8 {
    overlay
        .as_ref()
        .map_or(ptr::null(), |o| o.image.pixels().as_ptr())
}

/// # Safety
/// `overlay` must be NULL or a handle from [`pve_explain`] that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn pve_overlay_free(overlay: *mut PveOverlay) {
    if !overlay.is_null() {
        drop(Box::from_raw(overlay));
    }
}
