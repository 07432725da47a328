use std::ffi::{CStr, CString};
use std::ptr;

use pve::detector::{prior_model, Detector, DetectorConfig};
use pve::engine::{reference, save_model};
use pve::preprocess::{encode_png, RawImage};
use pve_ffi::*;

fn png(w: usize, h: usize) -> Vec<u8> {
    let mut px = Vec::with_capacity(w * h * 3);
    for i in 0..w * h * 3 {
        px.push((i * 37 % 251) as u8);
    }
    encode_png(&RawImage::new(w, h, px).unwrap()).unwrap()
}

fn last_error() -> Option<String> {
    let p = pve_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn prior(n_ai: u64, n_human: u64) -> *mut PveModel {
    let mut model = ptr::null_mut();
    assert_eq!(
        unsafe { pve_model_prior(n_ai, n_human, &mut model) },
        PveStatus::Ok
    );
    assert!(!model.is_null());
    model
}

#[test]
fn version_and_bias() {
    let v = unsafe { CStr::from_ptr(pve_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let mut bias = 0.0;
    assert_eq!(
        unsafe { pve_init_output_bias(190_549, 81_457, &mut bias) },
        PveStatus::Ok
    );
    assert!((bias - 0.849834).abs() < 1e-6);
    assert_eq!(
        unsafe { pve_init_output_bias(0, 1, &mut bias) },
        PveStatus::InvalidArgument
    );
    assert!(last_error().unwrap().contains("positive"));
    assert_eq!(
        unsafe { pve_init_output_bias(1, 1, ptr::null_mut()) },
        PveStatus::NullPointer
    );
}

#[test]
fn detect_matches_the_library() {
    let img = png(120, 90);
    let model = prior(190_549, 81_457);
    let mut out = PvePrediction {
        probability: -1.0,
        label: PveLabel::Human,
        threshold: 0.0,
        inference_micros: 0.0,
    };
    assert_eq!(
        unsafe { pve_detect(model, img.as_ptr(), img.len(), 0.5, &mut out) },
        PveStatus::Ok
    );
    assert!(last_error().is_none());
    let direct = Detector::new(
        prior_model(190_549, 81_457).unwrap().into(),
        DetectorConfig::default(),
    )
    .unwrap()
    .predict(&img)
    .unwrap();
    assert_eq!(out.probability.to_bits(), direct.probability.to_bits());
    assert_eq!(out.label, PveLabel::Ai);
    assert_eq!(out.threshold, 0.5);

    assert_eq!(
        unsafe { pve_detect(model, img.as_ptr(), img.len(), 0.8, &mut out) },
        PveStatus::Ok
    );
    assert_eq!(out.label, PveLabel::Human);
    assert_eq!(
        unsafe { pve_detect(model, img.as_ptr(), img.len(), 1.0, &mut out) },
        PveStatus::InvalidArgument
    );

    let junk = b"not an image";
    assert_eq!(
        unsafe { pve_detect(model, junk.as_ptr(), junk.len(), 0.5, &mut out) },
        PveStatus::InvalidImage
    );
    assert!(last_error().is_some());
    unsafe { pve_model_free(model) };
}

#[test]
fn explain_overlay_handle() {
    let img = png(33, 21);
    let model = prior(1, 3);
    let mut pred = PvePrediction {
        probability: 0.0,
        label: PveLabel::Ai,
        threshold: 0.0,
        inference_micros: 0.0,
    };
    let mut overlay = ptr::null_mut();
    let status = unsafe {
        pve_explain(
            model,
            img.as_ptr(),
            img.len(),
            0.5,
            0.45,
            PveColormap::Inferno as u32,
            false,
            &mut pred,
            &mut overlay,
        )
    };
    assert_eq!(status, PveStatus::Ok);
    assert_eq!(pred.label, PveLabel::Human);
    assert!(overlay.is_null());

    let status = unsafe {
        pve_explain(
            model,
            img.as_ptr(),
            img.len(),
            0.5,
            1.0,
            PveColormap::Grayscale as u32,
            true,
            &mut pred,
            &mut overlay,
        )
    };
    assert_eq!(status, PveStatus::Ok);
    assert!(!overlay.is_null());
    let (w, h) = unsafe { (pve_overlay_width(overlay), pve_overlay_height(overlay)) };
    assert_eq!((w, h), (33, 21));
    let pixels = unsafe { std::slice::from_raw_parts(pve_overlay_pixels(overlay), w * h * 3) };
    // zero weights: zero gradient, black grayscale heatmap at alpha 1
    assert!(pixels.iter().all(|&p| p == 0));
    unsafe { pve_overlay_free(overlay) };

    let status = unsafe {
        pve_explain(
            model,
            img.as_ptr(),
            img.len(),
            0.5,
            0.5,
            9,
            true,
            &mut pred,
            &mut overlay,
        )
    };
    assert_eq!(status, PveStatus::InvalidArgument);
    assert!(last_error().unwrap().contains("colormap"));
    unsafe { pve_model_free(model) };
}

#[test]
fn model_loading() {
    let model = reference::compact_detector(7, 5).unwrap();
    let bytes = save_model(&model);
    let mut handle = ptr::null_mut();
    assert_eq!(
        unsafe { pve_model_load_bytes(bytes.as_ptr(), bytes.len(), &mut handle) },
        PveStatus::Ok
    );
    let mut info = PveModelInfo {
        format_version: 0,
        n_ai: 0,
        n_human: 0,
        param_count: 0,
        input_height: 0,
        input_width: 0,
        input_channels: 0,
    };
    assert_eq!(unsafe { pve_model_info(handle, &mut info) }, PveStatus::Ok);
    assert_eq!((info.n_ai, info.n_human), (7, 5));
    assert_eq!(
        (info.input_height, info.input_width, info.input_channels),
        (256, 256, 3)
    );
    assert_eq!(info.param_count, model.param_count());
    let name = unsafe { CStr::from_ptr(pve_model_name(handle)) };
    assert_eq!(name.to_str().unwrap(), "compact-detector");
    unsafe { pve_model_free(handle) };

    let mut bad = bytes.clone();
    bad[20] ^= 1;
    let mut h2 = ptr::null_mut();
    assert_eq!(
        unsafe { pve_model_load_bytes(bad.as_ptr(), bad.len(), &mut h2) },
        PveStatus::InvalidModel
    );
    assert!(h2.is_null());
    assert!(last_error().unwrap().contains("checksum"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.pve");
    std::fs::write(&path, &bytes).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { pve_model_load_file(cpath.as_ptr(), &mut h2) },
        PveStatus::Ok
    );
    unsafe { pve_model_free(h2) };
    let missing = CString::new(dir.path().join("none.pve").to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { pve_model_load_file(missing.as_ptr(), &mut h2) },
        PveStatus::Io
    );
}

#[test]
fn null_handles_are_reported_not_dereferenced() {
    let mut out = PvePrediction {
        probability: 0.0,
        label: PveLabel::Human,
        threshold: 0.0,
        inference_micros: 0.0,
    };
    let img = png(4, 4);
    assert_eq!(
        unsafe { pve_detect(ptr::null(), img.as_ptr(), img.len(), 0.5, &mut out) },
        PveStatus::NullPointer
    );
    let model = prior(1, 1);
    assert_eq!(
        unsafe { pve_detect(model, ptr::null(), 0, 0.5, &mut out) },
        PveStatus::NullPointer
    );
    assert_eq!(
        unsafe { pve_model_load_file(ptr::null(), &mut ptr::null_mut()) },
        PveStatus::NullPointer
    );
    assert!(unsafe { pve_model_name(ptr::null()) }.is_null());
    assert_eq!(unsafe { pve_overlay_width(ptr::null()) }, 0);
    unsafe {
        pve_model_free(ptr::null_mut());
        pve_overlay_free(ptr::null_mut());
        pve_model_free(model);
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/pve.h")).unwrap();
    let source =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15, "{exports:?}");
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    for ty in [
        "PVE_STATUS_OK",
        "PVE_STATUS_PANIC",
        "typedef struct PveModel PveModel",
        "PvePrediction",
    ] {
        assert!(header.contains(ty), "{ty} missing from header");
    }
}
