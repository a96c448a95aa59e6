//! Seeded synthetic "vehicle" data.
//!
//! Targets are bright, left-right symmetric bodies with a darker windshield
//! band and a dark underside bar, drawn on a textured noise background.
//! Negatives are background texture with distractor blobs and with
//! vehicles that are badly off-centre or at the wrong scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boosting::{Label, LabeledSample};
use crate::evalkit::GroundTruthFrame;
use crate::features::{CANONICAL_H, CANONICAL_W};
use crate::imaging::{extract_window, GrayImage, Rect};
use crate::learner::derive_seed;

const TEXTURE_CELL: usize = 6;

/// Fills `img` with blocky low-frequency texture plus per-pixel noise.
fn paint_texture<R: Rng + ?Sized>(img: &mut GrayImage, rng: &mut R) {
    let base: i32 = rng.gen_range(70..=170);
    let cells_w = img.width().div_ceil(TEXTURE_CELL) + 1;
    let cells_h = img.height().div_ceil(TEXTURE_CELL) + 1;
    let cells: Vec<i32> = (0..cells_w * cells_h).map(|_| rng.gen_range(-35..=35)).collect();
    // offset so block edges do not align with the window grid
    let (ox, oy) = (rng.gen_range(0..TEXTURE_CELL), rng.gen_range(0..TEXTURE_CELL));
    for y in 0..img.height() {
        for x in 0..img.width() {
            let cell = cells[((y + oy) / TEXTURE_CELL) * cells_w + (x + ox) / TEXTURE_CELL];
            let v = base + cell + rng.gen_range(-20..=20);
            img.set(x, y, v.clamp(0, 255) as u8);
        }
    }
}

fn span(origin: usize, extent: usize, lo: f64, hi: f64) -> (usize, usize) {
    let a = origin + (extent as f64 * lo).round() as usize;
    let b = origin + (extent as f64 * hi).round() as usize;
    (a, b.max(a + 1).min(origin + extent))
}

fn fill<R: Rng + ?Sized>(img: &mut GrayImage, xs: (usize, usize), ys: (usize, usize), level: i32, noise: i32, rng: &mut R) {
    for y in ys.0..ys.1 {
        for x in xs.0..xs.1 {
            let v = level + rng.gen_range(-noise..=noise);
            img.set(x, y, v.clamp(0, 255) as u8);
        }
    }
}

/// Draws one target filling `r` (with slight proportional jitter).
pub fn paint_vehicle<R: Rng + ?Sized>(img: &mut GrayImage, r: &Rect, rng: &mut R) {
    let j = |rng: &mut R| rng.gen_range(-0.03..=0.03);
    let inset = 0.08 + j(rng);
    let top = 0.12 + j(rng);
    let bar_top = 0.68 + j(rng);
    let bar_bottom = 0.88 + j(rng);
    let body: i32 = rng.gen_range(180..=235);
    let bar: i32 = rng.gen_range(10..=45);

    let body_x = span(r.x, r.w, inset, 1.0 - inset);
    fill(img, body_x, span(r.y, r.h, top, bar_top), body, 8, rng);
    // windshield band, centred
    let shield = body - rng.gen_range(50..=90);
    fill(
        img,
        span(r.x, r.w, 0.25, 0.75),
        span(r.y, r.h, top + 0.08, top + 0.26),
        shield,
        6,
        rng,
    );
    fill(img, span(r.x, r.w, 0.04, 0.96), span(r.y, r.h, bar_top, bar_bottom), bar, 6, rng);
}

/// A vehicle-free blob: a plain box, a lone dark bar or a lopsided body.
pub fn paint_distractor<R: Rng + ?Sized>(img: &mut GrayImage, r: &Rect, rng: &mut R) {
    let level = if rng.gen_bool(0.6) { rng.gen_range(170..=235) } else { rng.gen_range(10..=60) };
    match rng.gen_range(0..3) {
        0 => fill(img, span(r.x, r.w, 0.0, 1.0), span(r.y, r.h, 0.0, 1.0), level, 8, rng),
        1 => fill(img, span(r.x, r.w, 0.0, 1.0), span(r.y, r.h, 0.6, 0.85), rng.gen_range(10..=45), 6, rng),
        _ => {
            let body: i32 = rng.gen_range(180..=235);
            fill(img, span(r.x, r.w, 0.0, 0.55), span(r.y, r.h, 0.1, 0.7), body, 8, rng);
            fill(img, span(r.x, r.w, 0.0, 0.45), span(r.y, r.h, 0.7, 0.9), rng.gen_range(10..=45), 6, rng);
        }
    }
}

/// Global gain and offset, as from exposure changes.
fn relight<R: Rng + ?Sized>(img: &mut GrayImage, rng: &mut R) {
    let gain = rng.gen_range(0.5..=1.2);
    let offset = rng.gen_range(-30.0..=30.0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let v = img.get(x, y) as f64 * gain + offset;
            img.set(x, y, v.round().clamp(0.0, 255.0) as u8);
        }
    }
}

fn random_box<R: Rng + ?Sized>(rng: &mut R, canvas_w: usize, canvas_h: usize, min_w: usize, max_w: usize) -> Rect {
    let w = rng.gen_range(min_w..=max_w.min(canvas_w));
    let h = ((w * CANONICAL_H + CANONICAL_W / 2) / CANONICAL_W).min(canvas_h);
    Rect::new(rng.gen_range(0..=canvas_w - w), rng.gen_range(0..=canvas_h - h), w, h)
}

fn canvas<R: Rng + ?Sized>(w: usize, h: usize, rng: &mut R) -> GrayImage {
    let mut img = GrayImage::filled(w, h, 0).expect("canvas size is non-empty");
    paint_texture(&mut img, rng);
    img
}

/// A vehicle cropped with a few percent of position and scale jitter.
pub fn positive_crop<R: Rng + ?Sized>(rng: &mut R) -> GrayImage {
    let mut img = canvas(96, 72, rng);
    let v = random_box(rng, 80, 60, 32, 56);
    let v = Rect::new(v.x + 8, v.y + 6, v.w, v.h);
    paint_vehicle(&mut img, &v, rng);
    let w = ((v.w as f64 * rng.gen_range(0.94..=1.06)).round() as usize).max(CANONICAL_W);
    let h = (w * CANONICAL_H + CANONICAL_W / 2) / CANONICAL_W;
    let (dx, dy) = ((v.w / 16) as i64, (v.h / 16) as i64);
    let cx = (v.x + v.w / 2) as i64 + rng.gen_range(-dx..=dx);
    let cy = (v.y + v.h / 2) as i64 + rng.gen_range(-dy..=dy);
    let x = (cx - w as i64 / 2).clamp(0, (img.width() - w) as i64) as usize;
    let y = (cy - h as i64 / 2).clamp(0, (img.height() - h) as i64) as usize;
    relight(&mut img, rng);
    extract_window(&img, &Rect::new(x, y, w, h), CANONICAL_W, CANONICAL_H).expect("crop lies inside the canvas")
}

/// Background, distractors, and vehicles that are off-centre or at the wrong scale.
pub fn negative_crop<R: Rng + ?Sized>(rng: &mut R) -> GrayImage {
    let mut img = canvas(96, 72, rng);
    for _ in 0..rng.gen_range(0..=2) {
        let r = random_box(rng, 96, 72, 8, 40);
        paint_distractor(&mut img, &r, rng);
    }
    let vehicle = rng.gen_bool(0.5).then(|| {
        let v = random_box(rng, 96, 72, 20, 72);
        paint_vehicle(&mut img, &v, rng);
        v
    });
    loop {
        let win = random_box(rng, 96, 72, CANONICAL_W, 64);
        if vehicle.is_none_or(|v| v.iou(&win) < 0.3) {
            relight(&mut img, rng);
            return extract_window(&img, &win, CANONICAL_W, CANONICAL_H).expect("window lies inside the canvas");
        }
    }
}

/// `n_pos` positive then `n_neg` negative canonical crops.
pub fn training_images(seed: u64, n_pos: usize, n_neg: usize) -> (Vec<GrayImage>, Vec<GrayImage>) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
    let pos = (0..n_pos).map(|_| positive_crop(&mut rng)).collect();
    let neg = (0..n_neg).map(|_| negative_crop(&mut rng)).collect();
    (pos, neg)
}

pub fn training_set(seed: u64, n_pos: usize, n_neg: usize) -> Vec<LabeledSample> {
    let (pos, neg) = training_images(seed, n_pos, n_neg);
    pos.into_iter()
        .map(|img| (img, Label::Pos))
        .chain(neg.into_iter().map(|img| (img, Label::Neg)))
        .map(|(img, label)| LabeledSample::new(img, label).expect("crops are canonical"))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SynthFrame {
    pub image: GrayImage,
    pub truth: GroundTruthFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub width: usize,
    pub height: usize,
    pub max_targets: usize,
    pub max_distractors: usize,
    pub min_target_w: usize,
    pub max_target_w: usize,
}

impl Default for FrameLayout {
    fn default() -> Self {
        FrameLayout {
            width: 128,
            height: 96,
            max_targets: 2,
            max_distractors: 2,
            min_target_w: 32,
            max_target_w: 64,
        }
    }
}

/// One frame with 1..=`max_targets` non-overlapping planted targets.
pub fn synth_frame<R: Rng + ?Sized>(frame_id: String, layout: &FrameLayout, rng: &mut R) -> SynthFrame {
    let mut image = GrayImage::filled(layout.width, layout.height, 0).expect("frame size is non-empty");
    paint_texture(&mut image, rng);
    let wanted = rng.gen_range(1..=layout.max_targets.max(1));
    let mut boxes: Vec<Rect> = Vec::new();
    let mut attempts = 0;
    while boxes.len() < wanted && attempts < 100 {
        attempts += 1;
        let w = rng.gen_range(layout.min_target_w..=layout.max_target_w.min(layout.width));
        let h = (w * CANONICAL_H + CANONICAL_W / 2) / CANONICAL_W;
        if h > layout.height {
            continue;
        }
        let r = Rect::new(rng.gen_range(0..=layout.width - w), rng.gen_range(0..=layout.height - h), w, h);
        // keep a gap so targets never touch
        let padded = Rect::new(r.x.saturating_sub(4), r.y.saturating_sub(4), r.w + 8, r.h + 8);
        if boxes.iter().all(|b| b.intersection_area(&padded) == 0) {
            boxes.push(r);
        }
    }
    for _ in 0..rng.gen_range(0..=layout.max_distractors) {
        let r = random_box(rng, layout.width, layout.height, 8, layout.max_target_w.min(layout.width));
        let padded = Rect::new(r.x.saturating_sub(4), r.y.saturating_sub(4), r.w + 8, r.h + 8);
        if boxes.iter().all(|b| b.intersection_area(&padded) == 0) {
            paint_distractor(&mut image, &r, rng);
        }
    }
    for b in &boxes {
        paint_vehicle(&mut image, b, rng);
    }
    relight(&mut image, rng);
    SynthFrame {
        image,
        truth: GroundTruthFrame { frame_id, boxes },
    }
}

/// `count` frames named `frame_0000.pgm`, `frame_0001.pgm`, ...
pub fn frame_sequence(seed: u64, count: usize, layout: &FrameLayout) -> Vec<SynthFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
    (0..count)
        .map(|i| synth_frame(format!("frame_{i:04}.pgm"), layout, &mut rng))
        .collect()
}
