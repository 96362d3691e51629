use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use dptrack::io::{load_annotations, load_ground_truth, load_sequence, save_frame, save_sequence, write_ground_truth};
use dptrack::pipeline::{compare, overlay_frames, path_csv, track, Method, RunConfig};
use dptrack::synth::{generate, occlusion_scenario, single_blob_scenario, SceneSpec};
use dptrack::{EvalReport, PixelPos};

#[derive(Parser)]
#[command(name = "dptrack", version, about = "Dynamic-programming hand tracking in grayscale image sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track the target through a directory of frames and write the path CSV.
    Track(TrackArgs),
    /// Score a tracked path against ground truth.
    Eval(EvalArgs),
    /// Render a synthetic scene with ground truth.
    Synth(SynthArgs),
    /// Run dp and dp-rf with the same settings and report both.
    Compare(CompareArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set rf.peak=200`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        Ok(RunConfig::load(self.config.as_deref(), &self.overrides)?)
    }
}

#[derive(Args)]
struct TrackArgs {
    /// Directory of .pgm/.png frames, ordered by file name.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// baseline-bbox, dp or dp-rf. Defaults to the configured method.
    #[arg(long)]
    method: Option<Method>,
    /// Start the traceback at this pixel instead of the segmentation seed.
    #[arg(long, value_name = "ROW,COL")]
    seed: Option<PixelPos>,
    /// Path CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write frames with the tracked position marked into this directory.
    #[arg(long)]
    overlay: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Tracked path CSV.
    #[arg(long)]
    path: PathBuf,
    /// Ground-truth CSV.
    #[arg(long)]
    gt: PathBuf,
    /// Comma-separated match thresholds in pixels.
    #[arg(long, value_delimiter = ',', default_value = "15,20")]
    thresholds: Vec<f64>,
    /// JSON report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Occlusion,
    SingleBlob,
}

#[derive(Args)]
struct SynthArgs {
    /// Scene description as JSON.
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    spec: Option<PathBuf>,
    /// A built-in scene.
    #[arg(long)]
    scenario: Option<Scenario>,
    /// Output directory for frames and gt.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated match thresholds; overrides `eval.thresholds`.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Seed used by both methods for a seeded traceback.
    #[arg(long, value_name = "ROW,COL")]
    seed: Option<PixelPos>,
    /// Emit the combined report as JSON.
    #[arg(long)]
    json: bool,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_track(args: TrackArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let seq = load_sequence(&args.input)?;
    let method = args.method.unwrap_or_else(|| cfg.resolved_method());
    info!("tracking {} frames of {}x{} with {method}", seq.len(), seq.width(), seq.height());
    let outcome = track(&seq, &cfg, method, args.seed)?;
    if let Some(dir) = &args.overlay {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, frame) in overlay_frames(&seq, &outcome.path).iter().enumerate() {
            save_frame(frame, &dir.join(format!("overlay_{i:04}.pgm")))?;
        }
    }
    emit(&path_csv(&outcome, &cfg), args.out.as_deref())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let tracked = load_annotations(&args.path)?;
    let truth = load_ground_truth(&args.gt, tracked.len())?;
    let report = EvalReport::evaluate(tracked.positions(), &truth, &args.thresholds)?;
    let mut text = serde_json::to_string(&report)?;
    text.push('\n');
    emit(&text, args.out.as_deref())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let spec = match (&args.spec, args.scenario) {
        (Some(path), _) => SceneSpec::from_json_file(path)?,
        (None, Some(Scenario::Occlusion)) => occlusion_scenario(),
        (None, Some(Scenario::SingleBlob)) => single_blob_scenario(),
        (None, None) => bail!("either --spec or --scenario is required"),
    };
    let scene = generate(&spec)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    save_sequence(scene.sequence.frames(), &args.out)?;
    // ground truth lives outside the frame pattern, so the directory stays loadable
    write_ground_truth(scene.target_truth(), &args.out.join("gt.csv"))?;
    info!("wrote {} frames to {}", scene.sequence.len(), args.out.display());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let mut cfg = args.config.load()?;
    if let Some(t) = args.thresholds {
        cfg.eval.thresholds = t;
        cfg.validate()?;
    }
    let seq = load_sequence(&args.input)?;
    let truth = load_ground_truth(&args.gt, seq.len())?;
    let report = compare(&seq, &truth, &cfg, args.seed)?;
    let text = if args.json { report.to_json() } else { report.to_text() };
    emit(&text, args.out.as_deref())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Track(a) => cmd_track(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
