use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use gw_core::eval::{self, DEFAULT_TAU};
use gw_core::frameio;
use gw_core::pipeline::draw_overlay;
use gw_core::synth;
use gw_core::{Pipeline, PipelineConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "gw", version, about = "Garment detection in surveillance footage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the detector over a frame directory or GWVS1 stream.
    Detect(DetectArgs),
    /// Score detections against ground truth at one IoU threshold.
    Eval(EvalArgs),
    /// Sweep the IoU threshold and write a precision/recall table.
    Curve(CurveArgs),
    /// Render a synthetic scene with ground truth.
    Synth(SynthArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// PPM frame directory or GWVS1 file.
    #[arg(long)]
    frames: PathBuf,
    /// Pipeline config file; built-in defaults when absent.
    #[arg(long, env = "GW_CONFIG")]
    config: Option<PathBuf>,
    /// Detections JSONL to write.
    #[arg(long)]
    out: PathBuf,
    /// Person box sidecar JSONL.
    #[arg(long)]
    persons: Option<PathBuf>,
    /// Directory for annotated PPM frames.
    #[arg(long)]
    overlay: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    det: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    det: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Inclusive range `start:stop:step`.
    #[arg(long, default_value = "0.05:0.95:0.05")]
    taus: String,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    out_frames: PathBuf,
    #[arg(long)]
    out_gt: PathBuf,
    #[arg(long)]
    out_persons: Option<PathBuf>,
    /// Also write the scene as a single GWVS1 stream.
    #[arg(long)]
    out_stream: Option<PathBuf>,
    /// Prepend this many background-only frames.
    #[arg(long, default_value_t = 0)]
    warmup_prefix: u64,
}

#[derive(Serialize)]
struct RunManifest {
    config: String,
    inputs: Inputs,
    outputs: Outputs,
    frames_processed: u64,
    detections: usize,
    duration_secs: f64,
}

#[derive(Serialize)]
struct Inputs {
    frames: PathBuf,
    config: Option<PathBuf>,
    persons: Option<PathBuf>,
}

#[derive(Serialize)]
struct Outputs {
    detections: PathBuf,
    overlay: Option<PathBuf>,
    manifest: PathBuf,
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn detect(args: DetectArgs) -> Result<()> {
    let started = Instant::now();
    let config = match &args.config {
        Some(path) => PipelineConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => PipelineConfig::default(),
    };
    config.validate()?;
    let persons: BTreeMap<u64, _> = match &args.persons {
        Some(path) => frameio::read_person_boxes(path, None)
            .with_context(|| format!("reading {}", path.display()))?
            .into_iter()
            .map(|p| (p.frame_index, p))
            .collect(),
        None => BTreeMap::new(),
    };
    if let Some(dir) = &args.overlay {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let frames = frameio::open_frames(&args.frames).with_context(|| format!("opening {}", args.frames.display()))?;
    let mut pipeline: Option<Pipeline> = None;
    let mut detections = Vec::new();
    let mut count = 0u64;
    for frame in frames {
        let frame = frame.with_context(|| format!("reading {}", args.frames.display()))?;
        let p = match &mut pipeline {
            Some(p) => p,
            None => pipeline.insert(Pipeline::new(frame.width(), frame.height(), config.clone())?),
        };
        let dets = p.process_frame(&frame, persons.get(&frame.index))?;
        if let Some(dir) = &args.overlay {
            frameio::write_frame(dir, &draw_overlay(&frame, &dets, &config.bands))?;
        }
        detections.extend(dets);
        count += 1;
    }
    frameio::write_detections(&detections, &args.out).with_context(|| format!("writing {}", args.out.display()))?;

    let manifest = RunManifest {
        config: config.to_config_string(),
        inputs: Inputs {
            frames: args.frames,
            config: args.config,
            persons: args.persons,
        },
        outputs: Outputs {
            manifest: manifest_path(&args.out),
            detections: args.out,
            overlay: args.overlay,
        },
        frames_processed: count,
        detections: detections.len(),
        duration_secs: started.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&manifest.outputs.manifest, text + "\n")
        .with_context(|| format!("writing {}", manifest.outputs.manifest.display()))?;
    eprintln!("processed {count} frames, {} detections", detections.len());
    Ok(())
}

fn read_pair(det: &Path, gt: &Path) -> Result<(Vec<gw_core::Annotation>, Vec<gw_core::Annotation>)> {
    let d = frameio::read_annotations(det, None).with_context(|| format!("reading {}", det.display()))?;
    let g = frameio::read_annotations(gt, None).with_context(|| format!("reading {}", gt.display()))?;
    Ok((d, g))
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let (d, g) = read_pair(&args.det, &args.gt)?;
    let report = eval::evaluate(&d, &g, args.tau)?;
    print!("{}", eval::summary_csv(&report));
    println!("# tau={:?}; mean_iou averages matched pairs only", report.threshold);
    Ok(())
}

fn curve(args: CurveArgs) -> Result<()> {
    let taus = eval::parse_tau_range(&args.taus)?;
    let (d, g) = read_pair(&args.det, &args.gt)?;
    let csv = eval::curve_csv(&eval::pr_curve(&d, &g, &taus)?);
    match &args.out {
        Some(path) => fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<()> {
    let scene = synth::load_scene(&args.scene).with_context(|| format!("loading {}", args.scene.display()))?;
    let scene = synth::warmup_prefix(&scene, args.warmup_prefix);
    synth::generate(&scene, &args.out_frames, &args.out_gt, args.out_persons.as_deref())?;
    if let Some(path) = &args.out_stream {
        synth::write_stream(&scene, path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let config = err
        .chain()
        .any(|e| e.downcast_ref::<gw_core::Error>().is_some_and(gw_core::Error::is_config));
    if config {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => detect(a),
        Command::Eval(a) => run_eval(a),
        Command::Curve(a) => curve(a),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
