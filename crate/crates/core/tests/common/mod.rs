//! Independent oracles shared by the integration suites. Nothing here calls
//! into the engine's arithmetic: the reference forward pass re-derives every
//! layer from the graph description in `f64`.
#![allow(dead_code)]

use std::collections::HashSet;

use pve::datakit::{
    metrics_from_predictions, stratified_split_by, DatasetManifest, ManifestEntry, Split, Stratify,
};
use pve::detector::{init_output_bias, Label};
use pve::engine::{
    backward_to_input, forward, GraphBuilder, LayerKind, LayerOp, ModelGraph, ModelMeta, TensorF32,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Activation pattern: ReLU signs and max-pool winners, in layer order.
pub type Pattern = Vec<usize>;

/// Reference forward pass. Returns the logit and the activation pattern.
pub fn reference_logit(model: &ModelGraph, input: &[f64]) -> (f64, Pattern) {
    let mut outs: Vec<Vec<f64>> = Vec::new();
    let mut pattern = Vec::new();
    let mut cur = input.to_vec();
    let mut logit = f64::NAN;
    for (i, spec) in model.layers().iter().enumerate() {
        let in_shape = model.layer_input_shape(i).to_vec();
        let w: Vec<f64> = model.layer_weights(i).iter().map(|&v| v as f64).collect();
        let b: Vec<f64> = model.layer_bias(i).iter().map(|&v| v as f64).collect();
        let next = match spec.op {
            LayerOp::Conv2d(c) => {
                let (h, wd, cin) = (in_shape[0] as isize, in_shape[1] as isize, in_shape[2]);
                let oh = (h as usize + 2 * c.padding - c.kernel_h) / c.stride + 1;
                let ow = (wd as usize + 2 * c.padding - c.kernel_w) / c.stride + 1;
                let mut out = vec![0.0; oh * ow * c.out_channels];
                for oy in 0..oh {
                    for ox in 0..ow {
                        for o in 0..c.out_channels {
                            let mut acc = b[o];
                            for ky in 0..c.kernel_h {
                                for kx in 0..c.kernel_w {
                                    let iy = (oy * c.stride + ky) as isize - c.padding as isize;
                                    let ix = (ox * c.stride + kx) as isize - c.padding as isize;
                                    if iy < 0 || ix < 0 || iy >= h || ix >= wd {
                                        continue;
                                    }
                                    for ci in 0..cin {
                                        let wi =
                                            ((o * c.kernel_h + ky) * c.kernel_w + kx) * cin + ci;
                                        let xi =
                                            (iy as usize * wd as usize + ix as usize) * cin + ci;
                                        acc += w[wi] * cur[xi];
                                    }
                                }
                            }
                            out[(oy * ow + ox) * c.out_channels + o] = acc;
                        }
                    }
                }
                out
            }
            LayerOp::Relu => cur
                .iter()
                .map(|&v| {
                    pattern.push((v > 0.0) as usize);
                    v.max(0.0)
                })
                .collect(),
            LayerOp::MaxPool2d { size, stride } => {
                let (h, wd, ch) = (in_shape[0], in_shape[1], in_shape[2]);
                let oh = (h - size) / stride + 1;
                let ow = (wd - size) / stride + 1;
                let mut out = vec![0.0; oh * ow * ch];
                for oy in 0..oh {
                    for ox in 0..ow {
                        for k in 0..ch {
                            let mut best = f64::NEG_INFINITY;
                            let mut arg = 0;
                            for dy in 0..size {
                                for dx in 0..size {
                                    let v =
                                        cur[((oy * stride + dy) * wd + ox * stride + dx) * ch + k];
                                    if v > best {
                                        best = v;
                                        arg = dy * size + dx;
                                    }
                                }
                            }
                            pattern.push(arg);
                            out[(oy * ow + ox) * ch + k] = best;
                        }
                    }
                }
                out
            }
            LayerOp::GlobalAvgPool => {
                let ch = in_shape[2];
                let n = in_shape[0] * in_shape[1];
                (0..ch)
                    .map(|k| (0..n).map(|p| cur[p * ch + k]).sum::<f64>() / n as f64)
                    .collect()
            }
            LayerOp::Dense {
                in_features,
                out_features,
            } => (0..out_features)
                .map(|o| {
                    b[o] + (0..in_features)
                        .map(|j| w[o * in_features + j] * cur[j])
                        .sum::<f64>()
                })
                .collect(),
            LayerOp::AddSkip { source } => {
                cur.iter().zip(&outs[source]).map(|(a, b)| a + b).collect()
            }
            LayerOp::SigmoidOutput => {
                logit = cur[0];
                cur.clone()
            }
        };
        outs.push(next.clone());
        cur = next;
    }
    (logit, pattern)
}

fn tensor_f64(t: &TensorF32) -> Vec<f64> {
    t.data().iter().map(|&v| v as f64).collect()
}

/// Random small graph containing every layer kind, with uniform weights.
pub fn random_graph(rng: &mut ChaCha8Rng) -> ModelGraph {
    random_graph_with_meta(rng, ModelMeta::new("fd-probe", 1, 1))
}

pub fn random_graph_with_meta(rng: &mut ChaCha8Rng, meta: ModelMeta) -> ModelGraph {
    let h = rng.random_range(4..=8);
    let w = rng.random_range(4..=8);
    let cin = rng.random_range(1..=3);
    let c = rng.random_range(1..=4);
    let k = rng.random_range(1..=3);
    let pad = if k == 1 { 0 } else { rng.random_range(0..=1) };
    let stride = if h.min(w) + 2 * pad - k >= 4 {
        rng.random_range(1..=2)
    } else {
        1
    };
    let mut b = GraphBuilder::new(vec![h, w, cin])
        .conv2d(k, stride, pad, cin, c)
        .relu();
    let skip_src = b.next_index() - 1;
    b = b.conv2d(3, 1, 1, c, c);
    if rng.random_bool(0.5) {
        b = b.relu();
    }
    b = b.add_skip(skip_src).relu();
    let (oh, ow) = (
        (h + 2 * pad - k) / stride + 1,
        (w + 2 * pad - k) / stride + 1,
    );
    let pool_stride = rng.random_range(1..=2);
    b = b.maxpool(2, pool_stride);
    let (ph, pw) = ((oh - 2) / pool_stride + 1, (ow - 2) / pool_stride + 1);
    b = match rng.random_range(0..3) {
        0 => b.global_avg_pool().dense(c, 1),
        1 => {
            let hidden = rng.random_range(1..=4);
            b.global_avg_pool().dense(c, hidden).relu().dense(hidden, 1)
        }
        _ => {
            let hidden = rng.random_range(1..=4);
            b.dense(ph * pw * c, hidden).relu().dense(hidden, 1)
        }
    };
    let mut model = b.sigmoid_output().build(meta).expect("valid graph");
    let scale = rng.random_range(0.3..1.2);
    for v in model.weights_mut() {
        *v = rng.random_range(-scale..scale) as f32;
    }
    model
}

/// Random input in [0, 1).
pub fn random_input(model: &ModelGraph, rng: &mut ChaCha8Rng) -> TensorF32 {
    let shape = model.input_shape().to_vec();
    let n = shape.iter().product();
    TensorF32::new(shape, (0..n).map(|_| rng.random::<f32>()).collect()).unwrap()
}

#[derive(Debug, Default, Clone, Copy)]
pub struct FdReport {
    pub checked: usize,
    pub skipped: usize,
    pub max_rel_error: f64,
    pub max_logit_error: f64,
}

/// Central finite differences of the reference logit against
/// `backward_to_input`. Coordinates whose ±h perturbation changes the
/// activation pattern (a kink) are skipped.
pub fn finite_difference_check(model: &ModelGraph, input: &TensorF32, step: f64) -> FdReport {
    let trace = forward(model, input).unwrap();
    let grad = backward_to_input(model, &trace).unwrap();
    let x = tensor_f64(input);
    let (logit, base) = reference_logit(model, &x);
    let mut report = FdReport {
        max_logit_error: (logit - trace.logit() as f64).abs() / logit.abs().max(1.0),
        ..Default::default()
    };
    for i in 0..x.len() {
        let mut plus = x.clone();
        plus[i] += step;
        let mut minus = x.clone();
        minus[i] -= step;
        let (lp, pp) = reference_logit(model, &plus);
        let (lm, pm) = reference_logit(model, &minus);
        if pp != base || pm != base {
            report.skipped += 1;
            continue;
        }
        let fd = (lp - lm) / (2.0 * step);
        let g = grad.data()[i] as f64;
        let scale = g.abs().max(fd.abs());
        let err = if scale > 1e-6 {
            (g - fd).abs() / scale
        } else {
            (g - fd).abs()
        };
        report.max_rel_error = report.max_rel_error.max(err);
        report.checked += 1;
    }
    report
}

pub fn graph_kinds(model: &ModelGraph) -> HashSet<LayerKind> {
    model.layers().iter().map(|l| l.kind()).collect()
}

/// Runs the finite-difference check over `count` random graphs.
pub fn gradient_sweep(count: usize, seed: u64) -> (FdReport, HashSet<LayerKind>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = FdReport::default();
    let mut kinds = HashSet::new();
    for _ in 0..count {
        let model = random_graph(&mut rng);
        kinds.extend(graph_kinds(&model));
        let input = random_input(&model, &mut rng);
        let r = finite_difference_check(&model, &input, 1e-3);
        total.checked += r.checked;
        total.skipped += r.skipped;
        total.max_rel_error = total.max_rel_error.max(r.max_rel_error);
        total.max_logit_error = total.max_logit_error.max(r.max_logit_error);
    }
    (total, kinds)
}

/// Random two-class manifest with `n` entries and a majority:minority skew
/// of up to `max_skew`.
pub fn random_manifest(rng: &mut ChaCha8Rng, n: usize, max_skew: f64) -> DatasetManifest {
    let skew = rng.random_range(1.0..=max_skew);
    let minority = ((n as f64 / (1.0 + skew)).round() as usize).clamp(5, n - 5);
    let minority_label = if rng.random_bool(0.5) {
        Label::Ai
    } else {
        Label::Human
    };
    let mut labels: Vec<Label> = (0..n)
        .map(|i| {
            if i < minority {
                minority_label
            } else if minority_label == Label::Ai {
                Label::Human
            } else {
                Label::Ai
            }
        })
        .collect();
    rand::seq::SliceRandom::shuffle(labels.as_mut_slice(), rng);
    let sources = ["wikiart", "latent-diffusion", "stable-diffusion", "photos"];
    let entries = labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| ManifestEntry {
            path: format!("img/{i:05}.png"),
            label,
            source: sources[rng.random_range(0..sources.len())].to_string(),
        })
        .collect();
    DatasetManifest::new(entries).unwrap()
}

/// Checks the split contract; returns a description of the first violation.
pub fn check_split(manifest: &DatasetManifest, seed: u64) -> Result<(), String> {
    let a = stratified_split_by(manifest, seed, Stratify::Class).map_err(|e| e.to_string())?;
    let again = stratified_split_by(manifest, seed, Stratify::Class).map_err(|e| e.to_string())?;
    if a.splits() != again.splits() {
        return Err(format!("seed {seed} not deterministic"));
    }
    if a.splits().len() != manifest.len() {
        return Err("assignment does not cover the manifest".into());
    }
    let mut seen = vec![0usize; manifest.len()];
    for s in Split::ALL {
        for i in a.indices(s) {
            seen[i] += 1;
        }
    }
    if seen.iter().any(|&c| c != 1) {
        return Err("splits are not a partition".into());
    }
    for label in [Label::Ai, Label::Human] {
        let n = manifest.count(label) as f64;
        for (s, ratio) in Split::ALL.into_iter().zip([0.6, 0.2, 0.2]) {
            let got = a.count(manifest, label, s) as f64;
            if (got - ratio * n).abs() > 1.0 {
                return Err(format!("{label} {s}: {got} vs quota {}", ratio * n));
            }
        }
    }
    Ok(())
}

pub fn split_sweep(cases: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = match case {
            0 => 10,
            1 => 10_000,
            _ => rng.random_range(10..=10_000),
        };
        let max_skew = if case == 1 {
            20.0
        } else {
            rng.random_range(1.0..=20.0)
        };
        let manifest = random_manifest(&mut rng, n, max_skew);
        check_split(&manifest, rng.random())?;
    }
    Ok(cases)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

/// Confusion matrix by direct enumeration of the pairs.
pub fn brute_force_confusion(predicted_ai: &[bool], labels: &[Label]) -> Confusion {
    let count = |p: bool, l: Label| {
        predicted_ai
            .iter()
            .zip(labels)
            .filter(|&(&a, &b)| a == p && b == l)
            .count() as u64
    };
    Confusion {
        tp: count(true, Label::Ai),
        fp: count(true, Label::Human),
        tn: count(false, Label::Human),
        fn_: count(false, Label::Ai),
    }
}

fn safe_div(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Every prediction/label combination for lengths 1..=`max_len`; returns the
/// number of cases compared.
pub fn exhaustive_metric_check(max_len: usize) -> Result<u64, String> {
    let mut cases = 0u64;
    if metrics_from_predictions(&[], &[], 0.5).is_ok() {
        return Err("empty predictions accepted".into());
    }
    for n in 1..=max_len {
        for label_bits in 0u32..(1 << n) {
            let labels: Vec<Label> = (0..n)
                .map(|i| {
                    if label_bits >> i & 1 == 1 {
                        Label::Ai
                    } else {
                        Label::Human
                    }
                })
                .collect();
            for pred_bits in 0u32..(1 << n) {
                let predicted: Vec<bool> = (0..n).map(|i| pred_bits >> i & 1 == 1).collect();
                let probs: Vec<f64> = predicted
                    .iter()
                    .map(|&p| if p { 0.75 } else { 0.25 })
                    .collect();
                let m =
                    metrics_from_predictions(&probs, &labels, 0.5).map_err(|e| e.to_string())?;
                let c = brute_force_confusion(&predicted, &labels);
                let want_acc = safe_div(c.tp + c.tn, n as u64);
                let want_prec = safe_div(c.tp, c.tp + c.fp);
                let want_rec = safe_div(c.tp, c.tp + c.fn_);
                let want_loss = (c.tp + c.tn) as f64 * -(0.75f64.ln()) / n as f64
                    + (c.fp + c.fn_) as f64 * -(0.25f64.ln()) / n as f64;
                if (m.tp, m.fp, m.tn, m.fn_) != (c.tp, c.fp, c.tn, c.fn_)
                    || m.accuracy != want_acc
                    || m.precision != want_prec
                    || m.recall != want_rec
                    || (m.loss - want_loss).abs() > 1e-12
                {
                    return Err(format!(
                        "mismatch for labels {label_bits:b} preds {pred_bits:b}: {m:?}"
                    ));
                }
                cases += 1;
            }
        }
    }
    Ok(cases)
}

/// The prior identity on random count pairs: σ(ln a − ln b) = a/(a+b).
pub fn bias_identity_sweep(pairs: usize, seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let a = rng.random_range(1..=10_000_000u64);
        let b = rng.random_range(1..=10_000_000u64);
        let bias = init_output_bias(a, b).map_err(|e| e.to_string())?;
        let sigma = 1.0 / (1.0 + (-bias).exp());
        let err = (sigma - a as f64 / (a + b) as f64).abs();
        worst = worst.max(err);
        if err > 1e-12 {
            return Err(format!("σ(bias({a}, {b})) off by {err:e}"));
        }
    }
    Ok(worst)
}

/// Index of the first maximum of the per-pixel channel max-abs.
pub fn raw_saliency_argmax(grad: &TensorF32) -> usize {
    let c = grad.shape()[2];
    let raw: Vec<f32> = grad
        .data()
        .chunks_exact(c)
        .map(|px| px.iter().map(|g| g.abs()).fold(0.0, f32::max))
        .collect();
    let mut best = 0;
    for (i, &v) in raw.iter().enumerate() {
        if v > raw[best] {
            best = i;
        }
    }
    best
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> pve::preprocess::RawImage {
    let mut px = vec![0u8; w * h * 3];
    rng.fill(px.as_mut_slice());
    pve::preprocess::RawImage::new(w, h, px).unwrap()
}

/// Saliency and overlay invariants over random gradients, images and a
/// randomly initialised compact detector. Returns the number of checks.
pub fn saliency_invariants(seed: u64) -> Result<usize, String> {
    use pve::detector::{Detector, DetectorConfig};
    use pve::engine::reference;
    use pve::preprocess::encode_png;
    use pve::saliency::{
        blend, colorize, explain, map_from_gradient, Colormap, OverlayConfig, SaliencyMap,
    };
    use std::sync::Arc;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = 0;

    for case in 0..200 {
        let (h, w, c) = (
            rng.random_range(1..=24),
            rng.random_range(1..=24),
            rng.random_range(1..=4),
        );
        let scale: f32 = [0.0, 1e-30, 1e-6, 1.0, 1e6][case % 5];
        let data: Vec<f32> = (0..h * w * c)
            .map(|_| rng.random_range(-1.0f32..1.0) * scale)
            .collect();
        let grad = TensorF32::new(vec![h, w, c], data).unwrap();
        let map = map_from_gradient(&grad).map_err(|e| e.to_string())?;
        if map.values().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(format!("map value outside [0,1] in case {case}"));
        }
        if scale == 0.0 && map.values().iter().any(|&v| v != 0.0) {
            return Err("zero gradient gave a non-zero map".into());
        }
        if scale != 0.0 && map.argmax() != raw_saliency_argmax(&grad) {
            return Err(format!("argmax moved in case {case}"));
        }
        checks += 1;
    }

    for _ in 0..50 {
        let (w, h) = (rng.random_range(1..=40), rng.random_range(1..=40));
        let original = random_image(&mut rng, w, h);
        let values: Vec<f32> = (0..w * h).map(|_| rng.random()).collect();
        let cmap = [Colormap::Inferno, Colormap::Jet, Colormap::Grayscale][rng.random_range(0..3)];
        let heat = colorize(&SaliencyMap::new(w, h, values).unwrap(), cmap);
        if blend(&original, &heat, 0.0).map_err(|e| e.to_string())? != original {
            return Err("alpha=0 is not the original".into());
        }
        if blend(&original, &heat, 1.0).map_err(|e| e.to_string())? != heat {
            return Err("alpha=1 is not the heatmap".into());
        }
        checks += 2;
    }

    let mut model = reference::compact_detector(1, 1).map_err(|e| e.to_string())?;
    model.init_kaiming(seed);
    let cfg = DetectorConfig {
        saliency_on_positive_only: false,
        ..DetectorConfig::default()
    };
    let detector = Detector::new(Arc::new(model), cfg).map_err(|e| e.to_string())?;
    let sizes = [
        (1, 1),
        (1, 300),
        (300, 1),
        (256, 256),
        (257, 255),
        (640, 480),
        (17, 923),
    ];
    for (i, &(w, h)) in sizes.iter().enumerate() {
        let img = random_image(&mut rng, w, h);
        let bytes = encode_png(&img).map_err(|e| e.to_string())?;
        let alpha = [0.0, 0.45, 1.0][i % 3];
        let ex = explain(
            &detector,
            &bytes,
            &OverlayConfig::new(alpha, Colormap::Inferno).unwrap(),
        )
        .map_err(|e| e.to_string())?;
        if (ex.image.width(), ex.image.height()) != (w, h) {
            return Err(format!(
                "overlay {}x{} for input {w}x{h}",
                ex.image.width(),
                ex.image.height()
            ));
        }
        if alpha == 0.0 && ex.image != img {
            return Err("alpha=0 overlay differs from input".into());
        }
        let map = ex.saliency.as_ref().ok_or("forced saliency missing")?;
        if map.values().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err("model saliency outside [0,1]".into());
        }
        checks += 1;
    }
    Ok(checks)
}

pub mod http {
    use axum::body::Body;
    use axum::http::{HeaderMap, Request, StatusCode};
    use axum::Router;
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    pub const BOUNDARY: &str = "pve-test-boundary-7MA4YWxkTrZu0gW";

    pub fn multipart(parts: &[Vec<u8>]) -> Vec<u8> {
        let mut body = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            body.extend_from_slice(
                format!(
                    "--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"image\"; filename=\"{i}.png\"\r\nContent-Type: image/png\r\n\r\n"
                )
                .as_bytes(),
            );
            body.extend_from_slice(p);
            body.extend_from_slice(b"\r\n");
        }
        body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
        body
    }

    pub fn post_raw(uri: &str, body: Vec<u8>) -> Request<Body> {
        Request::post(uri)
            .header("content-type", "application/octet-stream")
            .body(Body::from(body))
            .unwrap()
    }

    pub fn post_multipart(uri: &str, parts: &[Vec<u8>]) -> Request<Body> {
        Request::post(uri)
            .header(
                "content-type",
                format!("multipart/form-data; boundary={BOUNDARY}"),
            )
            .body(Body::from(multipart(parts)))
            .unwrap()
    }

    pub fn get(uri: &str) -> Request<Body> {
        Request::get(uri).body(Body::empty()).unwrap()
    }

    pub async fn send(router: &Router, req: Request<Body>) -> (StatusCode, HeaderMap, Vec<u8>) {
        let resp = router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let headers = resp.headers().clone();
        let body = resp
            .into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec();
        (status, headers, body)
    }

    /// Raw bytes of the first `"probability":` value in a JSON body.
    pub fn probability_bytes(body: &[u8]) -> Vec<u8> {
        let key = b"\"probability\":";
        let start = body
            .windows(key.len())
            .position(|w| w == key)
            .expect("probability field")
            + key.len();
        body[start..]
            .iter()
            .take_while(|&&b| b != b',' && b != b'}')
            .copied()
            .collect()
    }
}

/// Kaiming-initialised compact detector behind a ready router.
pub fn ready_router(seed: u64) -> axum::Router {
    use pve::engine::reference;
    use pve::service::{router, AppState, ServiceConfig};
    let mut model = reference::compact_detector(1, 1).unwrap();
    model.init_kaiming(seed);
    router(AppState::with_model(ServiceConfig::default(), model).unwrap())
}

/// 32 concurrent identical detect requests against serial ones, and a
/// batch with a corrupt middle item. Returns a summary on success.
pub fn service_equivalence(seed: u64) -> Result<String, String> {
    use pve::preprocess::encode_png;

    let rt = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(4)
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?;
    rt.block_on(async move {
        let app = ready_router(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let png = encode_png(&random_image(&mut rng, 320, 240)).map_err(|e| e.to_string())?;
        let uri = "/v1/detect?saliency=true&force=true";

        let mut serial = Vec::new();
        for _ in 0..4 {
            let (status, _, body) = http::send(&app, http::post_raw(uri, png.clone())).await;
            if status != 200 {
                return Err(format!("serial request returned {status}"));
            }
            serial.push(http::probability_bytes(&body));
        }
        if serial.iter().any(|p| p != &serial[0]) {
            return Err("serial requests disagree".into());
        }

        let handles: Vec<_> = (0..32)
            .map(|_| {
                let app = app.clone();
                let png = png.clone();
                tokio::spawn(async move { http::send(&app, http::post_raw(uri, png)).await })
            })
            .collect();
        for h in handles {
            let (status, _, body) = h.await.map_err(|e| e.to_string())?;
            if status != 200 {
                return Err(format!("concurrent request returned {status}"));
            }
            if http::probability_bytes(&body) != serial[0] {
                return Err("concurrent probability differs from serial".into());
            }
        }

        let other = encode_png(&random_image(&mut rng, 64, 64)).map_err(|e| e.to_string())?;
        let parts = vec![png.clone(), b"not an image".to_vec(), other];
        let (status, _, body) = http::send(
            &app,
            http::post_multipart("/v1/detect/batch?saliency=false", &parts),
        )
        .await;
        if status != 200 {
            return Err(format!("batch returned {status}"));
        }
        let items: Vec<serde_json::Value> =
            serde_json::from_slice(&body).map_err(|e| e.to_string())?;
        let shape: Vec<bool> = items
            .iter()
            .map(|v| v.get("probability").is_some())
            .collect();
        if shape != [true, false, true] || items[1]["status"] != 400 {
            return Err(format!("batch isolation failed: {items:?}"));
        }
        // the first probability in the raw body belongs to item 0
        if http::probability_bytes(&body) != serial[0] {
            return Err("batch item differs from single request".into());
        }
        Ok(format!(
            "32 concurrent == serial (probability {}); batch [ok, error 400, ok]",
            String::from_utf8_lossy(&serial[0])
        ))
    })
}
