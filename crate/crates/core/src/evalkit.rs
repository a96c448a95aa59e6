//! Ground-truth matching and ROC / precision-recall curves.
//!
//! A detection hits a ground-truth box when their IoU reaches the matching
//! threshold (0.5 by default); matching is greedy by descending margin and
//! one-to-one. The ROC abscissa is false positives per frame.

use std::io::{self, Write};

use thiserror::Error;

use crate::detector::Detection;
use crate::imaging::Rect;

pub const DEFAULT_IOU: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("AUC needs at least two curve points, got {0}")]
    TooFewPoints(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthFrame {
    pub frame_id: String,
    pub boxes: Vec<Rect>,
}

/// A frame's annotations together with the detector output for it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalFrame {
    pub truth: GroundTruthFrame,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchResult {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl std::ops::AddAssign for MatchResult {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

pub fn match_frame(dets: &[Detection], truth: &GroundTruthFrame, iou_threshold: f64) -> MatchResult {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].margin.total_cmp(&dets[a].margin));
    let mut claimed = vec![false; truth.boxes.len()];
    let mut tp = 0;
    for i in order {
        let mut best: Option<(usize, f64)> = None;
        for (j, gt) in truth.boxes.iter().enumerate() {
            if claimed[j] {
                continue;
            }
            let iou = dets[i].rect.iou(gt);
            if iou >= iou_threshold && best.is_none_or(|(_, b)| iou > b) {
                best = Some((j, iou));
            }
        }
        if let Some((j, _)) = best {
            claimed[j] = true;
            tp += 1;
        }
    }
    MatchResult {
        tp,
        fp: dets.len() - tp,
        fn_: truth.boxes.len() - tp,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub bias: f64,
    pub fp_per_frame: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub bias: f64,
    pub recall: f64,
    pub precision: f64,
}

/// `+inf`, every distinct margin in descending order, then `-inf`.
pub fn bias_sweep(frames: &[EvalFrame]) -> Vec<f64> {
    let mut margins: Vec<f64> = frames
        .iter()
        .flat_map(|f| f.detections.iter().map(|d| d.margin))
        .collect();
    margins.sort_by(|a, b| b.total_cmp(a));
    margins.dedup();
    let mut sweep = Vec::with_capacity(margins.len() + 2);
    sweep.push(f64::INFINITY);
    sweep.extend(margins);
    sweep.push(f64::NEG_INFINITY);
    sweep
}

/// Aggregate match counts keeping only detections with margin above `bias`.
pub fn counts_at(frames: &[EvalFrame], bias: f64, iou_threshold: f64) -> MatchResult {
    let mut total = MatchResult::default();
    for f in frames {
        let kept: Vec<Detection> = f.detections.iter().copied().filter(|d| d.margin > bias).collect();
        total += match_frame(&kept, &f.truth, iou_threshold);
    }
    total
}

fn ratio(num: usize, den: usize, empty: f64) -> f64 {
    if den == 0 {
        empty
    } else {
        num as f64 / den as f64
    }
}

pub fn roc_curve(frames: &[EvalFrame], sweep: &[f64], iou_threshold: f64) -> Vec<RocPoint> {
    let truths: usize = frames.iter().map(|f| f.truth.boxes.len()).sum();
    sweep
        .iter()
        .map(|&bias| {
            let c = counts_at(frames, bias, iou_threshold);
            RocPoint {
                bias,
                fp_per_frame: ratio(c.fp, frames.len(), 0.0),
                tpr: ratio(c.tp, truths, 0.0),
            }
        })
        .collect()
}

/// Precision is taken as 1 when nothing is kept.
pub fn pr_curve(frames: &[EvalFrame], sweep: &[f64], iou_threshold: f64) -> Vec<PrPoint> {
    let truths: usize = frames.iter().map(|f| f.truth.boxes.len()).sum();
    sweep
        .iter()
        .map(|&bias| {
            let c = counts_at(frames, bias, iou_threshold);
            PrPoint {
                bias,
                recall: ratio(c.tp, truths, 0.0),
                precision: ratio(c.tp, c.tp + c.fp, 1.0),
            }
        })
        .collect()
}

/// Trapezoidal area under TPR against FP-per-frame rescaled to `[0, 1]`.
///
/// When the curve never produces a false positive the abscissa collapses;
/// the area is then the highest TPR reached.
pub fn auc(points: &[RocPoint]) -> Result<f64, EvalError> {
    if points.len() < 2 {
        return Err(EvalError::TooFewPoints(points.len()));
    }
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p.fp_per_frame, p.tpr)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let max_fp = pts[pts.len() - 1].0;
    if max_fp <= 0.0 {
        return Ok(pts.iter().map(|p| p.1).fold(0.0, f64::max));
    }
    let area = pts
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) / max_fp * (w[0].1 + w[1].1) / 2.0)
        .sum();
    Ok(area)
}

pub fn write_roc<W: Write>(points: &[RocPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "bias,fp_per_frame,tpr")?;
    for p in points {
        writeln!(out, "{},{},{}", p.bias, p.fp_per_frame, p.tpr)?;
    }
    Ok(())
}

pub fn write_pr<W: Write>(points: &[PrPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "bias,recall,precision")?;
    for p in points {
        writeln!(out, "{},{},{}", p.bias, p.recall, p.precision)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn det(x: usize, y: usize, w: usize, h: usize, margin: f64) -> Detection {
        Detection { rect: Rect::new(x, y, w, h), margin }
    }

    fn truth(boxes: Vec<Rect>) -> GroundTruthFrame {
        GroundTruthFrame { frame_id: "f".into(), boxes }
    }

    #[test]
    fn match_frame_cases() {
        let gt = truth(vec![Rect::new(10, 10, 20, 20)]);
        assert_eq!(
            match_frame(&[det(10, 10, 20, 20, 1.0)], &gt, 0.5),
            MatchResult { tp: 1, fp: 0, fn_: 0 }
        );
        assert_eq!(
            match_frame(&[det(50, 50, 5, 5, 1.0)], &gt, 0.5),
            MatchResult { tp: 0, fp: 1, fn_: 1 }
        );
        assert_eq!(
            match_frame(&[det(10, 10, 20, 20, 1.0), det(11, 10, 20, 20, 2.0)], &gt, 0.5),
            MatchResult { tp: 1, fp: 1, fn_: 0 }
        );
    }

    #[test]
    fn higher_margin_claims_best_box() {
        let gt = truth(vec![Rect::new(0, 0, 10, 10), Rect::new(4, 0, 10, 10)]);
        // Overlaps both boxes; claims the one with the larger IoU.
        let r = match_frame(&[det(3, 0, 10, 10, 5.0), det(0, 0, 10, 10, 1.0)], &gt, 0.5);
        assert_eq!(r, MatchResult { tp: 2, fp: 0, fn_: 0 });
    }

    fn frames_fixture() -> Vec<EvalFrame> {
        vec![
            EvalFrame {
                truth: truth(vec![Rect::new(0, 0, 10, 10)]),
                detections: vec![det(0, 0, 10, 10, 3.0), det(40, 40, 10, 10, 1.0)],
            },
            EvalFrame {
                truth: truth(vec![Rect::new(20, 20, 10, 10)]),
                detections: vec![det(20, 21, 10, 10, 2.0)],
            },
        ]
    }

    #[test]
    fn roc_extremes() {
        let frames = frames_fixture();
        let sweep = bias_sweep(&frames);
        assert_eq!(sweep, vec![f64::INFINITY, 3.0, 2.0, 1.0, f64::NEG_INFINITY]);
        let roc = roc_curve(&frames, &sweep, 0.5);
        assert_eq!((roc[0].fp_per_frame, roc[0].tpr), (0.0, 0.0));
        let last = roc[roc.len() - 1];
        assert_eq!((last.fp_per_frame, last.tpr), (0.5, 1.0));
        assert_eq!((roc[2].fp_per_frame, roc[2].tpr), (0.0, 0.5));
    }

    #[test]
    fn pr_conventions() {
        let frames = frames_fixture();
        let pr = pr_curve(&frames, &[f64::INFINITY, 2.0, f64::NEG_INFINITY], 0.5);
        assert_eq!((pr[0].recall, pr[0].precision), (0.0, 1.0));
        assert_eq!((pr[1].recall, pr[1].precision), (0.5, 1.0));
        assert_eq!(pr[2].recall, 1.0);
        assert!((pr[2].precision - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pr_eight_of_ten() {
        // 10 frames, one truth each; 8 hits and 2 misplaced detections.
        let frames: Vec<EvalFrame> = (0..10)
            .map(|i| {
                let gt = Rect::new(10, 10, 20, 20);
                let d = if i < 8 { det(10, 10, 20, 20, 1.0) } else { det(60, 60, 20, 20, 1.0) };
                EvalFrame { truth: truth(vec![gt]), detections: vec![d] }
            })
            .collect();
        let c = counts_at(&frames, f64::NEG_INFINITY, 0.5);
        assert_eq!(c, MatchResult { tp: 8, fp: 2, fn_: 2 });
        let pr = pr_curve(&frames, &[f64::NEG_INFINITY], 0.5);
        assert!((pr[0].precision - 0.8).abs() < 1e-15);
        assert!((pr[0].recall - 0.8).abs() < 1e-15);
    }

    fn roc(points: &[(f64, f64)]) -> Vec<RocPoint> {
        points
            .iter()
            .map(|&(fp_per_frame, tpr)| RocPoint { bias: 0.0, fp_per_frame, tpr })
            .collect()
    }

    #[test]
    fn auc_shapes() {
        assert_eq!(auc(&roc(&[(0.0, 0.0), (1.0, 1.0)])).unwrap(), 0.5);
        assert_eq!(auc(&roc(&[(0.0, 1.0), (0.5, 1.0), (2.0, 1.0)])).unwrap(), 1.0);
        assert_eq!(auc(&roc(&[(0.0, 0.0), (0.0, 1.0)])).unwrap(), 1.0);
        assert_eq!(auc(&roc(&[(0.0, 0.0)])), Err(EvalError::TooFewPoints(1)));
    }

    #[test]
    fn auc_matches_riemann_sum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.gen_range(2..30);
            let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let mut ys: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            xs.sort_by(f64::total_cmp);
            ys.sort_by(f64::total_cmp);
            xs[0] = 0.0;
            let pts: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
            let max = xs[n - 1];
            // midpoint rule over the piecewise-linear curve
            let steps = 400_000;
            let mut area = 0.0;
            for k in 0..steps {
                let x = (k as f64 + 0.5) / steps as f64 * max;
                let j = pts.windows(2).position(|w| x <= w[1].0).unwrap_or(n - 2);
                let (a, b) = (pts[j], pts[j + 1]);
                let y = if b.0 > a.0 { a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0) } else { b.1 };
                area += y / steps as f64;
            }
            assert!((auc(&roc(&pts)).unwrap() - area).abs() < 1e-6);
        }
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        write_roc(&[], &mut buf).unwrap();
        write_pr(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "bias,fp_per_frame,tpr\nbias,recall,precision\n");
    }

    fn arb_frames() -> impl Strategy<Value = Vec<EvalFrame>> {
        let rect = (0usize..40, 0usize..40, 1usize..15, 1usize..15).prop_map(|(x, y, w, h)| Rect::new(x, y, w, h));
        let d = (rect.clone(), -5i32..5).prop_map(|(r, m)| Detection { rect: r, margin: m as f64 * 0.5 });
        let frame = (proptest::collection::vec(rect, 0..4), proptest::collection::vec(d, 0..6)).prop_map(
            |(boxes, detections)| EvalFrame { truth: truth(boxes), detections },
        );
        proptest::collection::vec(frame, 1..6)
    }

    proptest! {
        #[test]
        fn match_is_one_to_one(frames in arb_frames()) {
            for f in &frames {
                let r = match_frame(&f.detections, &f.truth, 0.5);
                prop_assert!(r.tp <= f.detections.len().min(f.truth.boxes.len()));
                prop_assert_eq!(r.tp + r.fn_, f.truth.boxes.len());
                prop_assert_eq!(r.tp + r.fp, f.detections.len());
            }
        }

        #[test]
        fn roc_monotone_and_bounded(frames in arb_frames()) {
            let sweep = bias_sweep(&frames);
            let curve = roc_curve(&frames, &sweep, 0.5);
            for w in curve.windows(2) {
                prop_assert!(w[1].tpr >= w[0].tpr);
                prop_assert!(w[1].fp_per_frame >= w[0].fp_per_frame);
            }
            for p in &curve {
                prop_assert!((0.0..=1.0).contains(&p.tpr));
            }
            for p in pr_curve(&frames, &sweep, 0.5) {
                prop_assert!((0.0..=1.0).contains(&p.precision) && (0.0..=1.0).contains(&p.recall));
            }
        }

        #[test]
        fn doubling_all_boxes_keeps_matches(frames in arb_frames()) {
            for f in &frames {
                let scaled_truth = GroundTruthFrame {
                    frame_id: f.truth.frame_id.clone(),
                    boxes: f.truth.boxes.iter().map(|b| b.scaled_by(2)).collect(),
                };
                let scaled: Vec<Detection> = f.detections.iter()
                    .map(|d| Detection { rect: d.rect.scaled_by(2), margin: d.margin })
                    .collect();
                prop_assert_eq!(
                    match_frame(&f.detections, &f.truth, 0.5),
                    match_frame(&scaled, &scaled_truth, 0.5)
                );
            }
        }
    }
}
