//! Implementations of the `train`, `detect`, `eval` and `synth` commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::boosting::{train as boost_train, BoostConfig, StopReason, StrongClassifier};
use crate::detector::{nms, scan, write_detections, Detection, ScanConfig};
use crate::evalkit::{
    auc, bias_sweep, counts_at, pr_curve, roc_curve, write_pr, write_roc, EvalFrame, GroundTruthFrame, MatchResult,
    PrPoint, RocPoint,
};
use crate::features::FeatureKind;
use crate::imaging::{GrayImage, Rect};
use crate::learner::{write_progress, GeneticLearner, LearnerConfig};

use super::annotations::format_annotations;
use super::dataset::{load_annotations, DatasetManifest};
use super::model_file::{format_model, parse_model};
use super::pgm::{load_pgm, save_pgm};
use super::synth::{frame_sequence, training_images, FrameLayout};
use super::{io_err, parse_err, read_text, AppError, LineError};

fn create(path: &Path) -> Result<BufWriter<File>, AppError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn finish(path: &Path, w: BufWriter<File>) -> Result<(), AppError> {
    w.into_inner()
        .map_err(|e| AppError::Io { path: path.to_path_buf(), source: e.into_error() })?
        .sync_all()
        .map_err(io_err(path))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), AppError> {
    let mut w = create(path)?;
    f(&mut w).map_err(io_err(path))?;
    finish(path, w)
}

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub manifest: PathBuf,
    pub family: FeatureKind,
    pub rounds: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Per-round CSV; defaults to `<out>.rounds.csv`.
    pub log: Option<PathBuf>,
    /// Optional per-generation CSV.
    pub progress: Option<PathBuf>,
    pub population: usize,
    pub generations: usize,
    pub stall: usize,
    pub workers: usize,
    pub literal_zero_update: bool,
}

impl TrainArgs {
    pub fn new(manifest: PathBuf, family: FeatureKind, out: PathBuf) -> Self {
        let defaults = LearnerConfig::new(family, 0);
        TrainArgs {
            manifest,
            family,
            rounds: 50,
            seed: 0,
            out,
            log: None,
            progress: None,
            population: defaults.population_size,
            generations: defaults.generations,
            stall: defaults.stall_limit,
            workers: 1,
            literal_zero_update: false,
        }
    }

    pub fn log_path(&self) -> PathBuf {
        self.log.clone().unwrap_or_else(|| {
            let mut p = self.out.clone().into_os_string();
            p.push(".rounds.csv");
            PathBuf::from(p)
        })
    }
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub stages: usize,
    pub train_error: f64,
    pub stop: StopReason,
    pub log_path: PathBuf,
}

pub fn train(args: &TrainArgs) -> Result<TrainSummary, AppError> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    let samples = manifest.load_samples()?;
    let config = LearnerConfig {
        population_size: args.population,
        generations: args.generations,
        stall_limit: args.stall,
        workers: args.workers,
        ..LearnerConfig::new(args.family, args.seed)
    };
    let mut learner = GeneticLearner::new(config)?;
    let boost = BoostConfig {
        literal_zero_update: args.literal_zero_update,
        ..BoostConfig::default()
    };
    let outcome = boost_train(&samples, args.rounds, &mut learner, &boost)?;

    let model_text = format_model(&outcome.model);
    write_file(&args.out, |w| w.write_all(model_text.as_bytes()))?;
    let log_path = args.log_path();
    write_file(&log_path, |w| crate::boosting::write_round_log(&outcome.log, w))?;
    if let Some(p) = &args.progress {
        write_file(p, |w| write_progress(learner.progress(), w))?;
    }
    Ok(TrainSummary {
        stages: outcome.model.len(),
        train_error: outcome.log.last().map_or(1.0, |r| r.train_error),
        stop: outcome.stop,
        log_path,
    })
}

pub fn load_model(path: &Path) -> Result<StrongClassifier, AppError> {
    parse_model(&read_text(path)?).map_err(parse_err(path))
}

#[derive(Debug, Clone)]
pub struct DetectArgs {
    pub model: PathBuf,
    pub frames: PathBuf,
    pub out: PathBuf,
    pub scan: ScanConfig,
    pub nms_iou: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectSummary {
    pub frames: usize,
    pub detections: usize,
}

/// Scan plus suppression for one frame, returned in scan order.
pub fn detect_frame(
    model: &StrongClassifier,
    frame: &GrayImage,
    cfg: &ScanConfig,
    nms_iou: f64,
) -> Result<Vec<Detection>, AppError> {
    let raw = scan(model, frame, cfg)?;
    let kept = nms(&raw, nms_iou);
    // restore scan order
    Ok(raw.into_iter().filter(|d| kept.contains(d)).collect())
}

/// `*.pgm` files of a directory, sorted by name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>, AppError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn detect(args: &DetectArgs) -> Result<DetectSummary, AppError> {
    let model = load_model(&args.model)?;
    let frames = list_frames(&args.frames)?;
    let mut w = create(&args.out)?;
    write_detections("", &[], true, &mut w).map_err(io_err(&args.out))?;
    let mut total = 0;
    for path in &frames {
        let frame = load_pgm(path)?;
        let dets = detect_frame(&model, &frame, &args.scan, args.nms_iou)?;
        let id = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        write_detections(&id, &dets, false, &mut w).map_err(io_err(&args.out))?;
        total += dets.len();
    }
    finish(&args.out, w)?;
    Ok(DetectSummary { frames: frames.len(), detections: total })
}

pub const DETECTIONS_HEADER: &str = "frame_id,x,y,w,h,margin";

/// Parses a detections CSV into `(frame_id, detection)` rows.
pub fn parse_detections(text: &str) -> Result<Vec<(String, Detection)>, LineError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == DETECTIONS_HEADER => {}
        _ => return Err(LineError::new(1, format!("expected header `{DETECTIONS_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let n = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(LineError::new(n, format!("expected 6 fields, found {}", fields.len())));
        }
        let rect = super::annotations::parse_box(&fields[1..5], n)?;
        let margin: f64 = fields[5]
            .parse()
            .map_err(|_| LineError::new(n, format!("margin {:?} is not a number", fields[5])))?;
        if margin.is_nan() {
            return Err(LineError::new(n, "margin is NaN"));
        }
        out.push((fields[0].to_string(), Detection { rect, margin }));
    }
    Ok(out)
}

/// Pairs detections with annotated frames. Frames seen only in the
/// detections count as frames without targets.
pub fn assemble_frames(truth: Vec<GroundTruthFrame>, detections: Vec<(String, Detection)>) -> Vec<EvalFrame> {
    let mut frames: Vec<EvalFrame> = truth
        .into_iter()
        .map(|t| EvalFrame { truth: t, detections: Vec::new() })
        .collect();
    for (id, d) in detections {
        match frames.iter_mut().find(|f| f.truth.frame_id == id) {
            Some(f) => f.detections.push(d),
            None => frames.push(EvalFrame {
                truth: GroundTruthFrame { frame_id: id, boxes: Vec::new() },
                detections: vec![d],
            }),
        }
    }
    frames
}

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub detections: PathBuf,
    pub annotations: PathBuf,
    pub roc_out: PathBuf,
    pub pr_out: PathBuf,
    pub iou: f64,
}

#[derive(Debug, Clone)]
pub struct EvalSummary {
    pub frames: usize,
    /// Counts with every detection kept.
    pub totals: MatchResult,
    pub auc: f64,
    pub roc: Vec<RocPoint>,
    pub pr: Vec<PrPoint>,
}

pub fn evaluate(frames: &[EvalFrame], iou: f64) -> EvalSummary {
    let sweep = bias_sweep(frames);
    let roc = roc_curve(frames, &sweep, iou);
    let pr = pr_curve(frames, &sweep, iou);
    EvalSummary {
        frames: frames.len(),
        totals: counts_at(frames, f64::NEG_INFINITY, iou),
        auc: auc(&roc).expect("the sweep always holds both sentinels"),
        roc,
        pr,
    }
}

pub fn eval(args: &EvalArgs) -> Result<EvalSummary, AppError> {
    let dets = parse_detections(&read_text(&args.detections)?).map_err(parse_err(&args.detections))?;
    let truth = load_annotations(&args.annotations)?;
    let frames = assemble_frames(truth, dets);
    let summary = evaluate(&frames, args.iou);
    write_file(&args.roc_out, |w| write_roc(&summary.roc, w))?;
    write_file(&args.pr_out, |w| write_pr(&summary.pr, w))?;
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct SynthArgs {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub positives: usize,
    pub negatives: usize,
    pub frames: usize,
    pub frame_layout: FrameLayout,
}

/// Paths written by [`synth`].
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub manifest: PathBuf,
    pub frames_dir: PathBuf,
    pub annotations: PathBuf,
}

/// Writes `pos/`, `neg/`, `frames/`, `annotations.txt` and `manifest.txt`.
pub fn synth(args: &SynthArgs) -> Result<SynthOutput, AppError> {
    let root = &args.out_dir;
    let (pos, neg) = training_images(args.seed, args.positives, args.negatives);
    let mut manifest = String::from("# synthetic training set\n");
    for (dir, label, images) in [("pos", "pos", &pos), ("neg", "neg", &neg)] {
        let d = root.join(dir);
        std::fs::create_dir_all(&d).map_err(io_err(&d))?;
        for (i, img) in images.iter().enumerate() {
            let name = format!("{label}_{i:04}.pgm");
            let p = d.join(&name);
            save_pgm(&p, img).map_err(io_err(&p))?;
            manifest.push_str(&format!("{label} {dir}/{name}\n"));
        }
    }

    let frames_dir = root.join("frames");
    std::fs::create_dir_all(&frames_dir).map_err(io_err(&frames_dir))?;
    let frames = frame_sequence(args.seed, args.frames, &args.frame_layout);
    for f in &frames {
        let p = frames_dir.join(&f.truth.frame_id);
        save_pgm(&p, &f.image).map_err(io_err(&p))?;
    }
    let truths: Vec<GroundTruthFrame> = frames.into_iter().map(|f| f.truth).collect();
    let annotations = root.join("annotations.txt");
    std::fs::write(&annotations, format_annotations(&truths)).map_err(io_err(&annotations))?;
    manifest.push_str("annotations annotations.txt\n");

    let manifest_path = root.join("manifest.txt");
    std::fs::write(&manifest_path, manifest).map_err(io_err(&manifest_path))?;
    Ok(SynthOutput {
        manifest: manifest_path,
        frames_dir,
        annotations,
    })
}

/// Boxes of `truth` that fall outside a `w`x`h` frame.
pub fn out_of_bounds_boxes(truth: &GroundTruthFrame, w: usize, h: usize) -> Vec<Rect> {
    truth.boxes.iter().copied().filter(|b| !b.fits(w, h)).collect()
}
