//! Multi-scale sliding-window detection and non-maximum suppression.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::boosting::StrongClassifier;
use crate::features::{FeatureError, WindowView};
use crate::imaging::{build_integral, GrayImage, Rect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub rect: Rect,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Window growth between pyramid levels; must exceed 1.
    pub scale_factor: f64,
    /// Level-0 stride in pixels; scaled with the window at each level.
    pub stride: usize,
    /// Smallest window width scanned.
    pub min_window_w: usize,
    /// A window is reported when its margin is strictly above this value.
    pub bias: f64,
    /// Worker threads used for window evaluation; 0 uses the global pool.
    pub workers: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            scale_factor: 1.25,
            stride: 2,
            min_window_w: 32,
            bias: 0.0,
            workers: 1,
        }
    }
}

/// One pyramid level: window size and stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Level {
    pub window_w: usize,
    pub window_h: usize,
    pub stride: usize,
}

/// Levels fitting a `frame_w`x`frame_h` frame, smallest first.
pub fn pyramid_levels(
    canonical: (usize, usize),
    frame_w: usize,
    frame_h: usize,
    cfg: &ScanConfig,
) -> Vec<Level> {
    assert!(cfg.scale_factor > 1.0, "scale factor must exceed 1");
    let (cw, ch) = canonical;
    let mut levels = Vec::new();
    for k in 0.. {
        let s = cfg.scale_factor.powi(k);
        let w = (cw as f64 * s).floor() as usize;
        let h = (ch as f64 * s).floor() as usize;
        if w > frame_w || h > frame_h {
            break;
        }
        if w < cfg.min_window_w {
            continue;
        }
        let stride = ((cfg.stride as f64 * s).round() as usize).max(1);
        if levels.last().is_some_and(|l: &Level| l.window_w == w && l.window_h == h) {
            continue;
        }
        levels.push(Level { window_w: w, window_h: h, stride });
    }
    levels
}

/// Every window position in scan order: level, then row, then column.
pub fn scan_windows(canonical: (usize, usize), frame_w: usize, frame_h: usize, cfg: &ScanConfig) -> Vec<Rect> {
    let mut out = Vec::new();
    for level in pyramid_levels(canonical, frame_w, frame_h, cfg) {
        for y in (0..=frame_h - level.window_h).step_by(level.stride) {
            for x in (0..=frame_w - level.window_w).step_by(level.stride) {
                out.push(Rect::new(x, y, level.window_w, level.window_h));
            }
        }
    }
    out
}

/// Margins of every scanned window, in scan order.
pub fn score_windows(
    model: &StrongClassifier,
    frame: &GrayImage,
    cfg: &ScanConfig,
) -> Result<Vec<Detection>, FeatureError> {
    let windows = scan_windows(model.window_size(), frame.width(), frame.height(), cfg);
    if windows.is_empty() {
        return Ok(Vec::new());
    }
    let ii = build_integral(frame);
    let score = |win: &Rect| -> Result<Detection, FeatureError> {
        let view = WindowView::new(&ii, frame, *win)?;
        Ok(Detection {
            rect: *win,
            margin: model.score_view(&view)?,
        })
    };
    if cfg.workers == 1 {
        return windows.iter().map(score).collect();
    }
    let run = || windows.par_iter().map(score).collect::<Result<Vec<_>, _>>();
    if cfg.workers == 0 {
        return run();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map(|pool| pool.install(run))
        .unwrap_or_else(|_| run())
}

/// Windows whose margin exceeds `cfg.bias`, in scan order.
pub fn scan(model: &StrongClassifier, frame: &GrayImage, cfg: &ScanConfig) -> Result<Vec<Detection>, FeatureError> {
    let mut all = score_windows(model, frame, cfg)?;
    all.retain(|d| d.margin > cfg.bias);
    Ok(all)
}

/// Greedy suppression: highest margin first (ties keep input order); a box
/// survives when its IoU with every kept box is below `overlap`.
pub fn nms(detections: &[Detection], overlap: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].margin.total_cmp(&detections[a].margin));
    let mut kept: Vec<Detection> = Vec::new();
    for i in order {
        let d = detections[i];
        if kept.iter().all(|k| k.rect.iou(&d.rect) < overlap) {
            kept.push(d);
        }
    }
    kept
}

/// Writes `frame_id,x,y,w,h,margin` rows; pass `header = true` for the first block.
pub fn write_detections<W: Write>(
    frame_id: &str,
    detections: &[Detection],
    header: bool,
    mut out: W,
) -> io::Result<()> {
    if header {
        writeln!(out, "frame_id,x,y,w,h,margin")?;
    }
    for d in detections {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            frame_id, d.rect.x, d.rect.y, d.rect.w, d.rect.h, d.margin
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boosting::{Polarity, Stage, WeakClassifier};
    use crate::features::{HaarFeature, CANONICAL_H, CANONICAL_W};

    fn haar_model(threshold: f64) -> StrongClassifier {
        let f = HaarFeature::new(Rect::new(0, 0, 16, 24), Rect::new(16, 0, 16, 24), threshold).unwrap();
        StrongClassifier::new(vec![Stage {
            alpha: 1.5,
            weak: WeakClassifier::new(f.into(), Polarity::Positive),
        }])
        .unwrap()
    }

    #[test]
    fn small_frame_yields_nothing() {
        let frame = GrayImage::filled(20, 20, 9).unwrap();
        assert!(scan(&haar_model(0.5), &frame, &ScanConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn constant_frame_yields_nothing() {
        let frame = GrayImage::filled(100, 80, 120).unwrap();
        assert!(scan(&haar_model(0.5), &frame, &ScanConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn pyramid_grows_until_frame_is_exceeded() {
        let levels = pyramid_levels((CANONICAL_W, CANONICAL_H), 64, 48, &ScanConfig::default());
        let sizes: Vec<(usize, usize)> = levels.iter().map(|l| (l.window_w, l.window_h)).collect();
        assert_eq!(sizes, vec![(32, 24), (40, 30), (50, 37), (62, 46)]);
        assert_eq!(levels[0].stride, 2);
        assert_eq!(levels[3].stride, 4);
    }

    #[test]
    fn windows_in_bounds_and_ordered() {
        let cfg = ScanConfig::default();
        let wins = scan_windows((CANONICAL_W, CANONICAL_H), 90, 70, &cfg);
        assert!(!wins.is_empty());
        for w in &wins {
            assert!(w.fits(90, 70));
        }
        for pair in wins.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            assert!(a.w < b.w || (a.w == b.w && (a.y, a.x) < (b.y, b.x)));
        }
    }

    #[test]
    fn detects_contrast_edge_and_parallel_matches_serial() {
        let frame = GrayImage::from_fn(96, 72, |x, y| {
            if (30..46).contains(&x) && (20..44).contains(&y) {
                220
            } else {
                40
            }
        })
        .unwrap();
        let model = haar_model(0.5);
        let serial = scan(&model, &frame, &ScanConfig::default()).unwrap();
        assert!(!serial.is_empty());
        for d in &serial {
            assert!(d.rect.fits(96, 72));
            assert!(d.margin > 0.0);
        }
        let parallel = scan(&model, &frame, &ScanConfig { workers: 4, ..ScanConfig::default() }).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn lower_bias_keeps_higher_bias_detections() {
        let frame = GrayImage::from_fn(80, 60, |x, y| ((x * 31 + y * 17) % 251) as u8).unwrap();
        let model = haar_model(0.2);
        let hi = scan(&model, &frame, &ScanConfig { bias: 1.0, ..ScanConfig::default() }).unwrap();
        let lo = scan(&model, &frame, &ScanConfig { bias: -10.0, ..ScanConfig::default() }).unwrap();
        for d in &hi {
            assert!(lo.contains(d));
        }
    }

    fn det(x: usize, y: usize, margin: f64) -> Detection {
        Detection { rect: Rect::new(x, y, 10, 10), margin }
    }

    #[test]
    fn nms_cases() {
        assert_eq!(nms(&[det(0, 0, 1.0)], 0.5), vec![det(0, 0, 1.0)]);
        assert_eq!(nms(&[det(0, 0, 1.0), det(0, 0, 2.0)], 0.5), vec![det(0, 0, 2.0)]);
        let disjoint = nms(&[det(0, 0, 1.0), det(50, 50, 2.0)], 0.5);
        assert_eq!(disjoint.len(), 2);
        // equal margins: earlier input wins
        assert_eq!(nms(&[det(0, 0, 1.0), det(1, 0, 1.0)], 0.5), vec![det(0, 0, 1.0)]);
    }

    #[test]
    fn nms_output_is_sparse_subset() {
        let mut dets = Vec::new();
        for i in 0..60 {
            dets.push(det((i * 7) % 40, (i * 3) % 30, ((i * 37) % 11) as f64));
        }
        let kept = nms(&dets, 0.5);
        for k in &kept {
            assert!(dets.contains(k));
        }
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                assert!(a.rect.iou(&b.rect) < 0.5);
            }
        }
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        write_detections("f.pgm", &[det(1, 2, 0.5)], true, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "frame_id,x,y,w,h,margin\nf.pgm,1,2,10,10,0.5\n");
    }
}
