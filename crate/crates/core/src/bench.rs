//! Latency benchmark harness: per-stage wall-clock samples with nearest-rank
//! percentiles. Warmup iterations run the full pipeline but are not recorded.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{backward_to_input, forward, ForwardTrace, ModelGraph};
use crate::preprocess::{prepare, ImageTensor, RawImage};
use crate::saliency::{map_from_gradient, SaliencyMap};

pub const PERCENTILE_METHOD: &str = "nearest-rank";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchStage {
    #[default]
    All,
    Forward,
    Saliency,
}

impl FromStr for BenchStage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(BenchStage::All),
            "forward" => Ok(BenchStage::Forward),
            "saliency" => Ok(BenchStage::Saliency),
            other => Err(format!(
                "unknown stage `{other}` (expected all, forward or saliency)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub iterations: usize,
    pub warmup: usize,
    pub stage: BenchStage,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            warmup: 10,
            stage: BenchStage::All,
        }
    }
}

/// The three timed stages of the detection pipeline.
pub trait Pipeline {
    type Prepared;
    type Traced;

    fn preprocess(&mut self) -> Self::Prepared;
    fn forward(&mut self, input: &Self::Prepared) -> Self::Traced;
    fn saliency(&mut self, trace: &Self::Traced);
}

/// Nearest-rank percentile of an ascending-sorted slice: the value at
/// position `ceil(pct/100 · n)` (1-based). `pct` is in (0, 100].
pub fn nearest_rank(sorted: &[f64], pct: u32) -> Option<f64> {
    if sorted.is_empty() || pct == 0 || pct > 100 {
        return None;
    }
    let n = sorted.len();
    let rank = (pct as usize * n).div_ceil(100).max(1);
    Some(sorted[rank - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub p50: f64,
    pub p90: f64,
    pub p95: f64,
}

impl StageStats {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let var = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            count: sorted.len(),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            mean,
            stddev: var.sqrt(),
            p50: nearest_rank(&sorted, 50)?,
            p90: nearest_rank(&sorted, 90)?,
            p95: nearest_rank(&sorted, 95)?,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    /// Per-iteration latency in microseconds.
    pub samples_micros: Vec<f64>,
    pub stats: Option<StageStats>,
}

impl StageReport {
    fn from_samples(samples_micros: Vec<f64>) -> Self {
        let stats = StageStats::from_samples(&samples_micros);
        Self {
            samples_micros,
            stats,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub model: String,
    pub input: String,
    pub hardware: String,
    pub percentile_method: String,
    pub stage: BenchStage,
    pub warmup: usize,
    pub iterations: usize,
    pub preprocess: StageReport,
    pub forward: StageReport,
    pub saliency: StageReport,
    /// Sum of the timed stages per iteration.
    pub end_to_end: StageReport,
}

fn elapsed_micros(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e6
}

/// Runs `warmup` untimed iterations, then `iterations` timed ones.
pub fn run<P: Pipeline>(
    pipeline: &mut P,
    config: &BenchConfig,
    model: &str,
    input: &str,
) -> BenchmarkReport {
    for _ in 0..config.warmup {
        let prepared = pipeline.preprocess();
        let traced = pipeline.forward(&prepared);
        if config.stage != BenchStage::Forward {
            pipeline.saliency(&traced);
        }
    }
    let mut pre = Vec::new();
    let mut fwd = Vec::new();
    let mut sal = Vec::new();
    let mut total = Vec::new();
    for _ in 0..config.iterations {
        match config.stage {
            BenchStage::All | BenchStage::Forward => {
                let t = Instant::now();
                let prepared = pipeline.preprocess();
                let p = elapsed_micros(t);
                let t = Instant::now();
                let traced = pipeline.forward(&prepared);
                let f = elapsed_micros(t);
                pre.push(p);
                fwd.push(f);
                let mut e2e = p + f;
                if config.stage == BenchStage::All {
                    let t = Instant::now();
                    pipeline.saliency(&traced);
                    let s = elapsed_micros(t);
                    sal.push(s);
                    e2e += s;
                }
                total.push(e2e);
            }
            BenchStage::Saliency => {
                let prepared = pipeline.preprocess();
                let traced = pipeline.forward(&prepared);
                let t = Instant::now();
                pipeline.saliency(&traced);
                sal.push(elapsed_micros(t));
            }
        }
    }
    BenchmarkReport {
        model: model.to_string(),
        input: input.to_string(),
        hardware: hardware_description(),
        percentile_method: PERCENTILE_METHOD.to_string(),
        stage: config.stage,
        warmup: config.warmup,
        iterations: config.iterations,
        preprocess: StageReport::from_samples(pre),
        forward: StageReport::from_samples(fwd),
        saliency: StageReport::from_samples(sal),
        end_to_end: StageReport::from_samples(total),
    }
}

/// CPU model, logical core count and target triple pieces.
pub fn hardware_description() -> String {
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".to_string());
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    format!(
        "{cpu}; {cores} logical cores; {}-{}",
        std::env::consts::ARCH,
        std::env::consts::OS
    )
}

/// Real pipeline over a model and a decoded image.
pub struct ModelPipeline<'a> {
    model: &'a ModelGraph,
    image: RawImage,
    pub last_map: Option<SaliencyMap>,
}

impl<'a> ModelPipeline<'a> {
    pub fn new(model: &'a ModelGraph, image: RawImage) -> Self {
        Self {
            model,
            image,
            last_map: None,
        }
    }
}

impl Pipeline for ModelPipeline<'_> {
    type Prepared = ImageTensor;
    type Traced = ForwardTrace;

    fn preprocess(&mut self) -> ImageTensor {
        prepare(&self.image)
    }

    fn forward(&mut self, input: &ImageTensor) -> ForwardTrace {
        forward(self.model, input.tensor()).expect("benchmark input matches model")
    }

    fn saliency(&mut self, trace: &ForwardTrace) {
        let grad = backward_to_input(self.model, trace).expect("trace from this model");
        self.last_map = Some(map_from_gradient(&grad).expect("image gradient"));
    }
}

/// Human-readable summary table (milliseconds).
pub fn render_table(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model:     {}", report.model);
    let _ = writeln!(out, "input:     {}", report.input);
    let _ = writeln!(out, "hardware:  {}", report.hardware);
    let _ = writeln!(
        out,
        "runs:      {} timed, {} warmup; percentiles: {}",
        report.iterations, report.warmup, report.percentile_method
    );
    let _ = writeln!(
        out,
        "{:<12} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "stage (ms)", "p50", "p90", "p95", "mean", "stddev", "min", "max"
    );
    for (name, stage) in [
        ("preprocess", &report.preprocess),
        ("forward", &report.forward),
        ("saliency", &report.saliency),
        ("end-to-end", &report.end_to_end),
    ] {
        match &stage.stats {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "{:<12} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                    name,
                    s.p50 / 1e3,
                    s.p90 / 1e3,
                    s.p95 / 1e3,
                    s.mean / 1e3,
                    s.stddev / 1e3,
                    s.min / 1e3,
                    s.max / 1e3
                );
            }
            None => {
                let _ = writeln!(out, "{name:<12} {:>9}", "-");
            }
        }
    }
    out
}
