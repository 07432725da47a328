mod common;

use std::io::Cursor;
use std::sync::Arc;

use common::*;
use image::{DynamicImage, ImageFormat, Rgba, RgbaImage};
use pve::detector::{classify, init_output_bias, prior_model, Detector, DetectorConfig, Label};
use pve::engine::{reference, ModelGraph};
use pve::preprocess::{
    decode_image, encode_png, normalize, preprocess, resize_bilinear, PreprocessError, RawImage,
};
use pve::saliency::{blend, explain, upscale_map, Colormap, OverlayConfig, SaliencyMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn encode(img: DynamicImage, format: ImageFormat) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, format).unwrap();
    out.into_inner()
}

fn zero_weight(n_ai: u64, n_human: u64) -> ModelGraph {
    prior_model(n_ai, n_human).unwrap()
}

#[test]
fn two_pixel_row_upsamples_with_half_pixel_centres() {
    let img = RawImage::new(2, 1, vec![0, 0, 0, 255, 255, 255]).unwrap();
    let out = resize_bilinear(&img, 4, 1);
    let reds: Vec<u8> = out.pixels().chunks(3).map(|p| p[0]).collect();
    assert_eq!(reds, [0, 64, 191, 255]);
}

#[test]
fn constant_images_stay_constant_through_preprocess() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let (w, h) = (rng.random_range(1..600), rng.random_range(1..600));
        let v: u8 = rng.random();
        let t = preprocess(&encode_png(&RawImage::filled(w, h, [v, v, v])).unwrap()).unwrap();
        assert_eq!(t.tensor().shape(), &[256, 256, 3]);
        assert!(t.tensor().data().iter().all(|&x| x == v as f32 / 255.0));
    }
}

#[test]
fn png_round_trip_is_lossless() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let (w, h) = (rng.random_range(1..80), rng.random_range(1..80));
        let img = random_image(&mut rng, w, h);
        assert_eq!(decode_image(&encode_png(&img).unwrap()).unwrap(), img);
    }
}

#[test]
fn alpha_composites_over_white() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut src = RgbaImage::new(16, 16);
    for px in src.pixels_mut() {
        *px = Rgba(rng.random());
    }
    let decoded = decode_image(&encode(
        DynamicImage::ImageRgba8(src.clone()),
        ImageFormat::Png,
    ))
    .unwrap();
    for (i, px) in src.pixels().enumerate() {
        let a = px.0[3] as f64 / 255.0;
        for c in 0..3 {
            let want = (a * px.0[c] as f64 + (1.0 - a) * 255.0 + 1e-9).round() as u8;
            assert_eq!(decoded.pixels()[i * 3 + c], want);
        }
    }
}

#[test]
fn jpeg_decodes_to_rgb() {
    let img = DynamicImage::ImageRgb8(image::RgbImage::from_pixel(
        33,
        17,
        image::Rgb([200, 40, 90]),
    ));
    let decoded = decode_image(&encode(img, ImageFormat::Jpeg)).unwrap();
    assert_eq!((decoded.width(), decoded.height()), (33, 17));
    let [r, g, b] = decoded.pixel(16, 8);
    assert!(r.abs_diff(200) <= 4 && g.abs_diff(40) <= 4 && b.abs_diff(90) <= 4);
}

#[test]
fn non_images_are_rejected() {
    assert!(matches!(
        decode_image(b"definitely not an image"),
        Err(PreprocessError::UnsupportedFormat(_))
    ));
    let mut png = encode_png(&RawImage::filled(8, 8, [1, 2, 3])).unwrap();
    png.truncate(png.len() / 2);
    assert!(matches!(
        decode_image(&png),
        Err(PreprocessError::Corrupt(_))
    ));
    // a BMP header is recognised but not accepted
    let mut bmp = b"BM".to_vec();
    bmp.extend_from_slice(&[0u8; 64]);
    assert!(matches!(
        decode_image(&bmp),
        Err(PreprocessError::UnsupportedFormat(Some(_)))
    ));
}

#[test]
fn normalize_rejects_unresized_input() {
    assert!(normalize(&RawImage::filled(255, 256, [0, 0, 0])).is_err());
}

#[test]
fn bias_matches_log_ratio_and_prior() {
    let bias = init_output_bias(190_549, 81_457).unwrap();
    assert!((bias - 0.849834).abs() < 1e-6, "{bias}");
    let sigma = 1.0 / (1.0 + (-bias).exp());
    assert!((sigma - 190_549.0 / 272_006.0).abs() < 1e-12);
    assert!(bias_identity_sweep(1_000, 1).is_ok());
}

#[test]
fn bias_is_antisymmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1_000 {
        let (a, b) = (
            rng.random_range(1..u32::MAX as u64),
            rng.random_range(1..u32::MAX as u64),
        );
        assert_eq!(
            init_output_bias(a, b).unwrap(),
            -init_output_bias(b, a).unwrap()
        );
    }
    assert!(init_output_bias(0, 5).is_err());
}

#[test]
fn zero_weight_detector_predicts_the_prior() {
    let detector = Detector::new(
        Arc::new(zero_weight(190_549, 81_457)),
        DetectorConfig::default(),
    )
    .unwrap();
    let bytes = encode_png(&RawImage::filled(64, 48, [10, 200, 30])).unwrap();
    let p = detector.predict(&bytes).unwrap();
    // the bias is stored as f32
    assert!((p.probability - 190_549.0 / 272_006.0).abs() < 1e-7);
    assert!((p.probability - 0.70053).abs() < 5e-6);
    assert_eq!(p.label, Label::Ai);
}

#[test]
fn labels_are_monotone_in_the_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let p: f64 = rng.random();
        let t1: f64 = rng.random_range(0.001..0.999);
        let t2: f64 = rng.random_range(t1..0.999);
        let l1 = classify(p, &DetectorConfig::with_threshold(t1).unwrap());
        let l2 = classify(p, &DetectorConfig::with_threshold(t2).unwrap());
        if l2 == Label::Ai {
            assert_eq!(l1, Label::Ai);
        }
    }
    let cfg = DetectorConfig::with_threshold(0.3).unwrap();
    assert_eq!(classify(0.3, &cfg), Label::Ai);
    assert!(DetectorConfig::with_threshold(1.0).is_err());
    assert!(DetectorConfig::with_threshold(0.0).is_err());
}

#[test]
fn detection_is_deterministic() {
    let mut model = reference::compact_detector(1, 1).unwrap();
    model.init_kaiming(42);
    let detector = Detector::new(Arc::new(model), DetectorConfig::default()).unwrap();
    let bytes = encode_png(&random_image(&mut ChaCha8Rng::seed_from_u64(8), 300, 200)).unwrap();
    let first = detector.predict(&bytes).unwrap().probability;
    for _ in 0..5 {
        assert_eq!(
            detector.predict(&bytes).unwrap().probability.to_bits(),
            first.to_bits()
        );
    }
}

#[test]
fn saliency_and_overlay_invariants() {
    assert!(saliency_invariants(11).unwrap() > 300);
}

#[test]
fn human_images_pass_through_unless_forced() {
    // prior below one half: every image is human
    let detector = Detector::new(Arc::new(zero_weight(1, 3)), DetectorConfig::default()).unwrap();
    let img = random_image(&mut ChaCha8Rng::seed_from_u64(9), 40, 30);
    let bytes = encode_png(&img).unwrap();
    let ex = explain(&detector, &bytes, &OverlayConfig::default()).unwrap();
    assert!(!ex.overlaid());
    assert_eq!(ex.image, img);

    let forced = detector
        .with_config(DetectorConfig {
            saliency_on_positive_only: false,
            ..DetectorConfig::default()
        })
        .unwrap();
    let ex = explain(
        &forced,
        &bytes,
        &OverlayConfig::new(1.0, Colormap::Grayscale).unwrap(),
    )
    .unwrap();
    assert!(ex.overlaid());
    // zero weights give a zero gradient, so the heatmap is uniformly black
    assert!(ex.image.pixels().iter().all(|&p| p == 0));
}

#[test]
fn linear_model_saliency_follows_weight_magnitude() {
    let mut model = reference::linear_detector(1, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 256 * 256 * 3;
    for w in &mut model.weights_mut()[..n] {
        *w = rng.random_range(-1.0..1.0);
    }
    let hot = (100 * 256 + 37) * 3 + 1;
    model.weights_mut()[hot] = -5.0;
    let input = pve::preprocess::prepare(&random_image(&mut rng, 256, 256));
    let map = pve::saliency::vanilla_gradient(&model, &input).unwrap();
    assert_eq!(map.argmax(), 100 * 256 + 37);
    assert_eq!(map.get(37, 100), 1.0);
}

#[test]
fn blend_rejects_mismatched_sizes_and_bad_alpha() {
    let a = RawImage::filled(3, 3, [0, 0, 0]);
    let b = RawImage::filled(3, 4, [0, 0, 0]);
    assert!(blend(&a, &b, 0.5).is_err());
    assert!(blend(&a, &a, 1.5).is_err());
    assert!(OverlayConfig::new(-0.1, Colormap::Jet).is_err());
    assert!("viridis".parse::<Colormap>().is_err());
}

#[test]
fn upscale_preserves_range_and_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let (w, h) = (rng.random_range(1..20), rng.random_range(1..20));
        let map = SaliencyMap::new(w, h, (0..w * h).map(|_| rng.random()).collect()).unwrap();
        let (tw, th) = (rng.random_range(1..100), rng.random_range(1..100));
        let up = upscale_map(&map, tw, th);
        assert_eq!((up.width(), up.height()), (tw, th));
        assert!(up.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
