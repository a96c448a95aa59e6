use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boostdet::app::commands::{self, DetectArgs, EvalArgs, SynthArgs, TrainArgs};
use boostdet::app::synth::FrameLayout;
use boostdet::evalkit::DEFAULT_IOU;
use boostdet::{FeatureKind, ScanConfig};

#[derive(Parser)]
#[command(name = "boostdet", version, about = "Boosted vehicle detection on PGM frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a boosted classifier from a dataset manifest.
    Train(TrainCmd),
    /// Scan every .pgm frame in a directory.
    Detect(DetectCmd),
    /// Score a detections CSV against annotations.
    Eval(EvalCmd),
    /// Write a synthetic dataset.
    Synth(SynthCmd),
}

fn parse_family(s: &str) -> Result<FeatureKind, String> {
    FeatureKind::from_name(s).ok_or_else(|| format!("unknown family {s:?} (haar, cp, symhaar, nconnex)"))
}

#[derive(Args)]
struct TrainCmd {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_parser = parse_family)]
    family: FeatureKind,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(1..))]
    rounds: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Per-round CSV [default: <out>.rounds.csv]
    #[arg(long)]
    log: Option<PathBuf>,
    /// Per-generation search CSV.
    #[arg(long)]
    progress: Option<PathBuf>,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(2..))]
    population: u32,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    generations: u32,
    #[arg(long, default_value_t = 8)]
    stall: u32,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    workers: u32,
    /// Zero the weight of correctly classified samples instead of scaling by beta.
    #[arg(long)]
    literal_zero_update: bool,
}

#[derive(Args)]
struct DetectCmd {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    frames: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.25)]
    scale_factor: f64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    stride: u32,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    bias: f64,
    #[arg(long, default_value_t = 0.3)]
    nms_iou: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    workers: u32,
}

#[derive(Args)]
struct EvalCmd {
    #[arg(long)]
    detections: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    roc_out: PathBuf,
    #[arg(long)]
    pr_out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IOU)]
    iou: f64,
}

#[derive(Args)]
struct SynthCmd {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    positives: usize,
    #[arg(long, default_value_t = 200)]
    negatives: usize,
    #[arg(long, default_value_t = 20)]
    frames: usize,
    #[arg(long, default_value_t = 128)]
    frame_width: usize,
    #[arg(long, default_value_t = 96)]
    frame_height: usize,
}

fn run(cmd: Command) -> Result<(), boostdet::app::AppError> {
    match cmd {
        Command::Train(c) => {
            let mut args = TrainArgs::new(c.manifest, c.family, c.out);
            args.rounds = c.rounds as usize;
            args.seed = c.seed;
            args.log = c.log;
            args.progress = c.progress;
            args.population = c.population as usize;
            args.generations = c.generations as usize;
            args.stall = c.stall as usize;
            args.workers = c.workers as usize;
            args.literal_zero_update = c.literal_zero_update;
            let s = commands::train(&args)?;
            println!(
                "stages={} train_error={:.4} stop={:?} log={}",
                s.stages,
                s.train_error,
                s.stop,
                s.log_path.display()
            );
        }
        Command::Detect(c) => {
            if c.scale_factor.is_nan() || c.scale_factor <= 1.0 {
                return Err(boostdet::app::AppError::Data("--scale-factor must exceed 1".into()));
            }
            let scan = ScanConfig {
                scale_factor: c.scale_factor,
                stride: c.stride as usize,
                bias: c.bias,
                workers: c.workers as usize,
                ..ScanConfig::default()
            };
            let s = commands::detect(&DetectArgs {
                model: c.model,
                frames: c.frames,
                out: c.out,
                scan,
                nms_iou: c.nms_iou,
            })?;
            println!("frames={} detections={}", s.frames, s.detections);
        }
        Command::Eval(c) => {
            let s = commands::eval(&EvalArgs {
                detections: c.detections,
                annotations: c.annotations,
                roc_out: c.roc_out,
                pr_out: c.pr_out,
                iou: c.iou,
            })?;
            println!(
                "frames={} tp={} fp={} fn={} auc={:.4}",
                s.frames, s.totals.tp, s.totals.fp, s.totals.fn_, s.auc
            );
        }
        Command::Synth(c) => {
            let frame_layout = FrameLayout {
                width: c.frame_width,
                height: c.frame_height,
                ..FrameLayout::default()
            };
            if frame_layout.width < frame_layout.max_target_w || frame_layout.height < frame_layout.max_target_w * 3 / 4 {
                return Err(boostdet::app::AppError::Data(format!(
                    "frames must be at least {}x{}",
                    frame_layout.max_target_w,
                    frame_layout.max_target_w * 3 / 4
                )));
            }
            let out = commands::synth(&SynthArgs {
                out_dir: c.out,
                seed: c.seed,
                positives: c.positives,
                negatives: c.negatives,
                frames: c.frames,
                frame_layout,
            })?;
            println!("manifest={}", out.manifest.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
