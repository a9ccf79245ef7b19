//! Command-line frontend: calibrate, scan, synth, eval.
//!
//! Exit codes: 0 on success (an empty suspect list is a valid result),
//! 2 on any input or contract error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use config::{parse_deny_labels, resolve_match_tau, resolve_scan_options, PipelineConfig, ScanOverrides};
use heattrace_core::detection::{list_detection_image_ids, load_detections_file};
use heattrace_core::eval::{evaluate, load_truth, render_overlay};
use heattrace_core::fusion::load_suspects;
use heattrace_core::pipeline::{report_to_json, scan, suspects_to_json, ThresholdModeName};
use heattrace_core::registration::{fit_affine, load_correspondences};
use heattrace_core::synth::{generate_scene, SceneSpec};
use heattrace_core::{AffineMap, ImageGrid, ThermalGrid};

#[derive(Parser)]
#[command(
    name = "heattrace",
    version,
    about = "Locate objects likely concealing powered cameras by fusing thermal and RGB imagery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the thermal-to-RGB affine map from a correspondence file.
    Calibrate(CalibrateArgs),
    /// Warp, threshold, and associate heat with detections for one scene.
    Scan(Box<ScanArgs>),
    /// Generate a synthetic scene bundle.
    Synth(SynthArgs),
    /// Score a suspects file against ground truth.
    Eval(EvalArgs),
}

#[derive(clap::Args)]
struct CalibrateArgs {
    /// Correspondences: JSON list of {"thermal":[x,y],"rgb":[x,y]}.
    #[arg(long)]
    pairs: PathBuf,
    /// Where to write the fitted map.
    #[arg(long, default_value = "map.json")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThresholdModeArg {
    Absolute,
    RobustSigma,
}

impl From<ThresholdModeArg> for ThresholdModeName {
    fn from(arg: ThresholdModeArg) -> Self {
        match arg {
            ThresholdModeArg::Absolute => ThresholdModeName::Absolute,
            ThresholdModeArg::RobustSigma => ThresholdModeName::RobustSigma,
        }
    }
}

#[derive(clap::Args)]
struct ScanArgs {
    /// RGB frame (8-bit PNG).
    #[arg(long)]
    rgb: Option<PathBuf>,
    /// Thermal grid: .csv of Celsius values, or 16-bit .png with a
    /// `<file>.json` sidecar declaring offset_c / scale_c_per_unit.
    #[arg(long)]
    thermal: Option<PathBuf>,
    /// Fitted thermal-to-RGB map (map.json).
    #[arg(long)]
    map: Option<PathBuf>,
    /// Detections file as produced by a detector run or `synth`.
    #[arg(long)]
    detections: Option<PathBuf>,
    /// Which image's detections to use; defaults to the file's only entry.
    #[arg(long)]
    image_id: Option<String>,
    /// Ground truth to draw (blue) on the overlay.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Output directory for suspects.json and overlay.png.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    threshold_mode: Option<ThresholdModeArg>,
    /// Cutoff in C (absolute) or sigma multiplier (robust-sigma).
    #[arg(long)]
    threshold_param: Option<f64>,
    /// Discard heat contours smaller than this many pixels.
    #[arg(long)]
    min_contour_area: Option<usize>,
    /// Discard detections below this confidence.
    #[arg(long)]
    min_confidence: Option<f64>,
    /// Comma-separated labels to remove from the suspect list.
    #[arg(long)]
    deny_labels: Option<String>,
    /// Emit a dilated contour bbox when no detection box encloses a
    /// heat trace.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    fallback: Option<bool>,
    /// Dilation margin for fallback regions, in pixels.
    #[arg(long)]
    fallback_margin: Option<f64>,
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Scene spec JSON; built-in defaults when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Override the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the scene bundle.
    #[arg(long, default_value = "scene")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Suspects file written by scan.
    #[arg(long)]
    suspects: PathBuf,
    /// Ground truth JSON.
    #[arg(long)]
    truth: PathBuf,
    /// IoU above which a target counts as matched.
    #[arg(long)]
    match_tau: Option<f64>,
    /// Where to write the report.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Scan(args) => cmd_scan(*args),
        Command::Synth(args) => cmd_synth(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let pairs = load_correspondences(&args.pairs)
        .with_context(|| format!("loading correspondences {}", args.pairs.display()))?;
    let map = fit_affine(&pairs)?;
    map.write_json_file(&args.out)?;
    println!(
        "fitted affine map from {} correspondences, residual_rms {:.6} px -> {}",
        pairs.len(),
        map.residual_rms,
        args.out.display()
    );
    Ok(())
}

fn cmd_scan(args: ScanArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let overrides = ScanOverrides {
        threshold_mode: args.threshold_mode.map(Into::into),
        threshold_param: args.threshold_param,
        min_contour_area: args.min_contour_area,
        min_confidence: args.min_confidence,
        deny_labels: args.deny_labels.as_deref().map(parse_deny_labels),
        fallback: args.fallback,
        fallback_margin: args.fallback_margin,
    };
    let opts = resolve_scan_options(&overrides, &config)?;

    let rgb_path = require_path(args.rgb.or(config.rgb.clone()), "rgb")?;
    let thermal_path = require_path(args.thermal.or(config.thermal.clone()), "thermal")?;
    let map_path = require_path(args.map.or(config.map.clone()), "map")?;
    let detections_path =
        require_path(args.detections.or(config.detections.clone()), "detections")?;
    let out_dir = args
        .out
        .or(config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let truth_path = args.truth.or(config.truth.clone());

    let rgb = ImageGrid::from_png(&rgb_path)?;
    let thermal = load_thermal(&thermal_path)?;
    let map = AffineMap::from_json_file(&map_path)?;
    let image_id = match &args.image_id {
        Some(id) => id.clone(),
        None => sole_image_id(&detections_path)?,
    };
    let detections = load_detections_file(&detections_path, &image_id)?;
    let truth = match &truth_path {
        Some(path) => load_truth(path)?,
        None => Vec::new(),
    };

    let output = scan(&thermal, &map, &detections, rgb.width(), rgb.height(), &opts)?;

    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let suspects_path = out_dir.join("suspects.json");
    std::fs::write(&suspects_path, suspects_to_json(&output.suspects))
        .with_context(|| format!("writing {}", suspects_path.display()))?;
    let overlay_path = out_dir.join("overlay.png");
    render_overlay(&rgb, &output.suspects, &truth).write_png(&overlay_path)?;

    println!(
        "{} suspects ({} heat contours, {} detections) -> {}",
        output.suspects.len(),
        output.contours.len(),
        detections.len(),
        suspects_path.display()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(path) => SceneSpec::from_json_file(path)?,
        None => SceneSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let scene = generate_scene(&spec)?;
    scene.write_bundle(&args.out)?;
    println!(
        "scene bundle (seed {}, {} objects, {} hiding cameras) -> {}",
        spec.seed,
        spec.n_objects,
        spec.n_hiders,
        args.out.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let match_tau = resolve_match_tau(args.match_tau, &config)?;
    let suspects = load_suspects(&args.suspects)?;
    let truth = load_truth(&args.truth)?;
    let report = evaluate(&suspects, &truth, match_tau)?;
    std::fs::write(&args.out, report_to_json(&report))
        .with_context(|| format!("writing {}", args.out.display()))?;
    print!("{}", report.to_table());
    Ok(())
}

fn load_thermal(path: &Path) -> Result<ThermalGrid> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(ThermalGrid::from_csv(path)?),
        Some("png") => Ok(ThermalGrid::from_png16(path)?),
        _ => bail!(
            "{}: unsupported thermal format (expected .csv or .png)",
            path.display()
        ),
    }
}

fn require_path(path: Option<PathBuf>, name: &str) -> Result<PathBuf> {
    path.ok_or_else(|| anyhow::anyhow!("missing input: pass --{name} or set it in the config"))
}

fn sole_image_id(path: &Path) -> Result<String> {
    let ids = list_detection_image_ids(path)?;
    match ids.as_slice() {
        [only] => Ok(only.clone()),
        [] => bail!("{}: no image entries", path.display()),
        _ => bail!(
            "{}: multiple image entries ({}); pass --image-id",
            path.display(),
            ids.join(", ")
        ),
    }
}
