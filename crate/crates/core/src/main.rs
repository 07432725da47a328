use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pve::bench::{self, BenchConfig, BenchStage, ModelPipeline};
use pve::datakit::{
    evaluate, stratified_split_by, synth, train_toy, AugmentConfig, DatasetManifest, Split,
    SplitAssignment, Stratify, TrainConfig,
};
use pve::detector::{init_output_bias, Detector, DetectorConfig, Label};
use pve::engine::{load_model_file, reference, save_model_file, ModelGraph};
use pve::preprocess::{decode_image, encode_png};
use pve::saliency::{explain, Colormap, OverlayConfig};
use pve::service::{self, ServiceConfig};

#[derive(Parser)]
#[command(
    name = "pve",
    version,
    about = "AI-generated image detection with saliency overlays"
)]
struct Cli {
    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one image. Exit code: 0 human, 2 ai, 1 error.
    Detect(DetectArgs),
    /// Write a saliency overlay PNG for an image.
    Overlay(OverlayArgs),
    /// Measure per-stage latency.
    Bench(BenchArgs),
    /// Stratified 60/20/20 split of a manifest.
    Split(SplitArgs),
    /// Desk-scale SGD training.
    Train(TrainArgs),
    /// Accuracy / precision / recall / loss on one split.
    Eval(EvalArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Write a fresh model container.
    InitModel(InitModelArgs),
    /// Generate a synthetic labelled corpus.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ModelArg {
    /// Model container; defaults to the zero-weight compact detector.
    #[arg(long, short = 'm')]
    model: Option<PathBuf>,
}

impl ModelArg {
    fn load(&self) -> anyhow::Result<ModelGraph> {
        let cfg = ServiceConfig {
            model_path: self.model.clone(),
            ..ServiceConfig::default()
        };
        service::load_configured_model(&cfg).with_context(|| match &self.model {
            Some(p) => format!("loading model {}", p.display()),
            None => "building default model".into(),
        })
    }
}

#[derive(Args)]
struct DetectArgs {
    image: PathBuf,
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Args)]
struct OverlayArgs {
    image: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, default_value_t = 0.45)]
    alpha: f64,
    #[arg(long, default_value = "inferno")]
    colormap: String,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Overlay even when the image is labelled human.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 10)]
    warmup: usize,
    /// Benchmark this image instead of synthetic noise.
    #[arg(long, conflicts_with = "synthetic")]
    image: Option<PathBuf>,
    /// Fixed-seed 256x256 noise input (the default).
    #[arg(long)]
    synthetic: bool,
    #[arg(long, default_value = "all")]
    stage: String,
    #[command(flatten)]
    model: ModelArg,
    /// Also write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    /// Stratify within each (label, source) pair instead of per label.
    #[arg(long)]
    per_source: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arch {
    Compact,
    Linear,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    split: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 8)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "compact")]
    arch: Arch,
    /// Start from this container instead of a fresh architecture.
    #[arg(long)]
    template: Option<PathBuf>,
    /// Keep the template's weights instead of re-initializing.
    #[arg(long)]
    no_reinit: bool,
    #[arg(long)]
    no_augment: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    split: PathBuf,
    #[command(flatten)]
    model: ModelArg,
    /// Which split to score.
    #[arg(long, default_value = "val")]
    on: String,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "PVE_LISTEN", default_value = service::DEFAULT_LISTEN)]
    listen: String,
    #[arg(long, env = "PVE_MODEL")]
    model: Option<PathBuf>,
    #[arg(long, env = "PVE_MAX_BODY", default_value_t = service::DEFAULT_MAX_BODY)]
    max_body: usize,
    #[arg(long, env = "PVE_THRESHOLD", default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, env = "PVE_ALPHA", default_value_t = 0.45)]
    alpha: f64,
    #[arg(long, env = "PVE_COLORMAP", default_value = "inferno")]
    colormap: String,
    /// Allowed CORS origin (repeatable); any origin when omitted.
    #[arg(long = "cors-allow", env = "PVE_CORS_ALLOW", value_delimiter = ',')]
    cors_allow: Vec<String>,
}

#[derive(Args)]
struct InitModelArgs {
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "compact")]
    arch: Arch,
    #[arg(long, default_value_t = reference::DEFAULT_N_AI)]
    n_ai: u64,
    #[arg(long, default_value_t = reference::DEFAULT_N_HUMAN)]
    n_human: u64,
    /// Kaiming-initialize with this seed instead of zero weights.
    #[arg(long)]
    kaiming_seed: Option<u64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 500)]
    n_ai: usize,
    #[arg(long, default_value_t = 500)]
    n_human: usize,
    #[arg(long, default_value_t = 256)]
    side: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn build_arch(arch: Arch, n_ai: u64, n_human: u64) -> anyhow::Result<ModelGraph> {
    Ok(match arch {
        Arch::Compact => reference::compact_detector(n_ai, n_human)?,
        Arch::Linear => reference::linear_detector(n_ai, n_human)?,
    })
}

fn label_exit(label: Label) -> ExitCode {
    match label {
        Label::Human => ExitCode::from(0),
        Label::Ai => ExitCode::from(2),
    }
}

fn detect(args: DetectArgs, json: bool) -> anyhow::Result<ExitCode> {
    let bytes = read(&args.image)?;
    let model = args.model.load()?;
    let detector = Detector::new(
        Arc::new(model),
        DetectorConfig::with_threshold(args.threshold)?,
    )?;
    let d = detector.detect(&bytes)?;
    if json {
        print_json(&serde_json::json!({
            "image": args.image.display().to_string(),
            "prediction": d.prediction,
            "timings": d.timings,
        }))?;
    } else {
        println!(
            "{}: probability {:.5} label {} (threshold {}) decode {:.0}us preprocess {:.0}us forward {:.0}us",
            args.image.display(),
            d.prediction.probability,
            d.prediction.label,
            d.prediction.threshold,
            d.timings.decode_micros,
            d.timings.preprocess_micros,
            d.timings.forward_micros,
        );
    }
    Ok(label_exit(d.prediction.label))
}

fn overlay(args: OverlayArgs, json: bool) -> anyhow::Result<ExitCode> {
    let bytes = read(&args.image)?;
    let model = args.model.load()?;
    let cfg = DetectorConfig {
        threshold: args.threshold,
        saliency_on_positive_only: !args.force,
    };
    let detector = Detector::new(Arc::new(model), cfg)?;
    let overlay_cfg = OverlayConfig::new(args.alpha, args.colormap.parse::<Colormap>()?)?;
    let ex = explain(&detector, &bytes, &overlay_cfg)?;
    let png = encode_png(&ex.image)?;
    std::fs::write(&args.output, png)
        .with_context(|| format!("writing {}", args.output.display()))?;
    if json {
        print_json(&serde_json::json!({
            "output": args.output.display().to_string(),
            "overlaid": ex.overlaid(),
            "width": ex.image.width(),
            "height": ex.image.height(),
            "prediction": ex.prediction,
            "timings": ex.timings,
        }))?;
    } else {
        println!(
            "{} -> {} ({}x{}, label {}, probability {:.5}, {})",
            args.image.display(),
            args.output.display(),
            ex.image.width(),
            ex.image.height(),
            ex.prediction.label,
            ex.prediction.probability,
            if ex.overlaid() {
                "overlay"
            } else {
                "pass-through"
            }
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn bench_cmd(args: BenchArgs, json: bool) -> anyhow::Result<ExitCode> {
    if args.iters == 0 {
        bail!("--iters must be at least 1");
    }
    let stage: BenchStage = args.stage.parse().map_err(anyhow::Error::msg)?;
    let model = args.model.load()?;
    let (image, input) = match &args.image {
        Some(path) => {
            let img = decode_image(&read(path)?)?;
            let desc = format!("{} ({}x{})", path.display(), img.width(), img.height());
            (img, desc)
        }
        None => (
            synth::noise_image(reference::INPUT_SIDE, reference::INPUT_SIDE, 0),
            "synthetic noise 256x256 (seed 0)".to_string(),
        ),
    };
    let cfg = BenchConfig {
        iterations: args.iters,
        warmup: args.warmup,
        stage,
    };
    let mut pipeline = ModelPipeline::new(&model, image);
    let report = bench::run(&mut pipeline, &cfg, model.name(), &input);
    if let Some(path) = &args.report {
        std::fs::write(path, serde_json::to_vec_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if json {
        print_json(&report)?;
    } else {
        print!("{}", bench::render_table(&report));
    }
    Ok(ExitCode::SUCCESS)
}

fn split_cmd(args: SplitArgs, json: bool) -> anyhow::Result<ExitCode> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    let stratify = if args.per_source {
        Stratify::ClassAndSource
    } else {
        Stratify::Class
    };
    let assignment = stratified_split_by(&manifest, args.seed, stratify)?;
    assignment.save(&manifest, &args.output)?;
    let mut counts = serde_json::Map::new();
    for label in [Label::Ai, Label::Human] {
        let per: serde_json::Map<_, _> = Split::ALL
            .iter()
            .map(|s| (s.to_string(), assignment.count(&manifest, label, *s).into()))
            .collect();
        counts.insert(label.to_string(), per.into());
    }
    if json {
        print_json(&serde_json::json!({
            "output": args.output.display().to_string(),
            "seed": args.seed,
            "counts": counts,
        }))?;
    } else {
        println!(
            "wrote {} ({} entries, seed {})",
            args.output.display(),
            manifest.len(),
            args.seed
        );
        println!("{}", serde_json::Value::Object(counts));
    }
    Ok(ExitCode::SUCCESS)
}

fn train_cmd(args: TrainArgs, json: bool) -> anyhow::Result<ExitCode> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    let assignment = SplitAssignment::load(&manifest, &args.split)?;
    let template = match &args.template {
        Some(p) => load_model_file(p)?,
        None => build_arch(args.arch, 1, 1)?,
    };
    let mut augment = AugmentConfig {
        seed: args.seed,
        ..AugmentConfig::default()
    };
    if args.no_augment {
        augment.hflip_prob = 0.0;
        augment.max_rotation_degrees = 0.0;
        augment.contrast_range = (1.0, 1.0);
    }
    let cfg = TrainConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        batch_size: args.batch_size,
        seed: args.seed,
        reinit: !args.no_reinit,
        augment,
    };
    let (mut model, report) = train_toy(&template, &manifest, &assignment, &cfg)?;
    let (n_ai, n_human) = report.train_counts;
    let mut meta = model.meta().clone();
    meta.n_ai = n_ai as u64;
    meta.n_human = n_human as u64;
    model = ModelGraph::new(
        meta,
        model.input_shape().to_vec(),
        model.layers().to_vec(),
        model.weights().to_vec(),
    )?;
    save_model_file(&model, &args.output)?;
    if json {
        print_json(&serde_json::json!({
            "output": args.output.display().to_string(),
            "report": report,
        }))?;
    } else {
        for (i, l) in report.epoch_losses.iter().enumerate() {
            println!("epoch {i}: loss {l:.5}");
        }
        println!(
            "trained on {n_ai} ai / {n_human} human, output bias {:.6}; wrote {}",
            report.output_bias,
            args.output.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn eval_cmd(args: EvalArgs, json: bool) -> anyhow::Result<ExitCode> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    let assignment = SplitAssignment::load(&manifest, &args.split)?;
    let split: Split = args.on.parse().map_err(anyhow::Error::msg)?;
    let model = args.model.load()?;
    let m = evaluate(&model, &manifest, &assignment, split, args.threshold)?;
    if json {
        print_json(
            &serde_json::json!({ "split": split, "threshold": args.threshold, "metrics": m }),
        )?;
    } else {
        println!(
            "{split}: accuracy {:.4} precision {:.4} recall {:.4} loss {:.4} (tp {} fp {} tn {} fn {})",
            m.accuracy, m.precision, m.recall, m.loss, m.tp, m.fp, m.tn, m.fn_
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn serve_cmd(args: ServeArgs) -> anyhow::Result<ExitCode> {
    let config = ServiceConfig {
        listen: args
            .listen
            .parse()
            .with_context(|| format!("bad listen address {}", args.listen))?,
        model_path: args.model,
        max_body_bytes: args.max_body,
        default_threshold: DetectorConfig::with_threshold(args.threshold)?.threshold,
        default_overlay: OverlayConfig::new(args.alpha, args.colormap.parse()?)?,
        cors_allow: args.cors_allow,
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(service::serve(config))?;
    Ok(ExitCode::SUCCESS)
}

fn init_model_cmd(args: InitModelArgs, json: bool) -> anyhow::Result<ExitCode> {
    let mut model = build_arch(args.arch, args.n_ai, args.n_human)?;
    if let Some(seed) = args.kaiming_seed {
        model.init_kaiming(seed);
    }
    let bias = init_output_bias(args.n_ai, args.n_human)?;
    model.set_output_bias(bias as f32)?;
    save_model_file(&model, &args.output)?;
    if json {
        print_json(&serde_json::json!({
            "output": args.output.display().to_string(),
            "name": model.name(),
            "params": model.param_count(),
            "output_bias": bias,
        }))?;
    } else {
        println!(
            "wrote {} ({}, {} params, output bias {:.6})",
            args.output.display(),
            model.name(),
            model.param_count(),
            bias
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn synth_cmd(args: SynthArgs, json: bool) -> anyhow::Result<ExitCode> {
    let manifest =
        synth::write_corpus(&args.output, args.n_ai, args.n_human, args.side, args.seed)?;
    let path = args.output.join("manifest.tsv");
    if json {
        print_json(&serde_json::json!({
            "manifest": path.display().to_string(),
            "entries": manifest.len(),
        }))?;
    } else {
        println!("wrote {} images and {}", manifest.len(), path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    let cli = Cli::parse();
    let json = cli.json;
    let result = match cli.command {
        Command::Detect(a) => detect(a, json),
        Command::Overlay(a) => overlay(a, json),
        Command::Bench(a) => bench_cmd(a, json),
        Command::Split(a) => split_cmd(a, json),
        Command::Train(a) => train_cmd(a, json),
        Command::Eval(a) => eval_cmd(a, json),
        Command::Serve(a) => serve_cmd(a),
        Command::InitModel(a) => init_model_cmd(a, json),
        Command::Synth(a) => synth_cmd(a, json),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
