//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use boostdet::features::{ControlPointsFeature, HaarFeature, NConnexityFeature, PointClass, SymmetricHaarFeature};
use boostdet::{Feature, GrayImage, Rect, CANONICAL_H, CANONICAL_W};
use rand::Rng;

pub fn random_image<R: Rng>(w: usize, h: usize, rng: &mut R) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

/// Random image with blocky structure, so features see real contrast.
pub fn structured_image<R: Rng>(w: usize, h: usize, rng: &mut R) -> GrayImage {
    let cell = rng.gen_range(2..8);
    let cols = w / cell + 1;
    let blocks: Vec<u8> = (0..cols * (h / cell + 1)).map(|_| rng.gen()).collect();
    let noise = rng.gen_range(0..40u8);
    GrayImage::from_fn(w, h, |x, y| {
        blocks[(y / cell) * cols + x / cell].saturating_add(rng.gen_range(0..=noise))
    })
    .unwrap()
}

pub fn pixel_sum(img: &GrayImage, r: &Rect) -> u64 {
    let mut s = 0u64;
    for y in r.y..r.y + r.h {
        for x in r.x..r.x + r.w {
            s += img.get(x, y) as u64;
        }
    }
    s
}

fn pixel_square_sum(img: &GrayImage, r: &Rect) -> u64 {
    let mut s = 0u64;
    for y in r.y..r.y + r.h {
        for x in r.x..r.x + r.w {
            s += (img.get(x, y) as u64).pow(2);
        }
    }
    s
}

/// Window standard deviation from direct pixel loops, floored at 1.
pub fn sigma(img: &GrayImage, win: &Rect) -> f64 {
    let n = win.area() as u128;
    let s = pixel_sum(img, win) as u128;
    let q = pixel_square_sum(img, win) as u128;
    ((n * q - s * s) as f64).sqrt() / n as f64
}

fn clamped_sigma(img: &GrayImage, win: &Rect) -> f64 {
    sigma(img, win).max(1.0)
}

/// Canonical rect mapped into `win` with floor rounding, extents at least 1.
pub fn scale(r: &Rect, win: &Rect) -> Rect {
    let x = win.x + (r.x * win.w) / CANONICAL_W;
    let y = win.y + (r.y * win.h) / CANONICAL_H;
    let w = std::cmp::max(1, (r.w * win.w) / CANONICAL_W);
    let h = std::cmp::max(1, (r.h * win.h) / CANONICAL_H);
    Rect::new(x, y, w, h)
}

fn mean(img: &GrayImage, r: &Rect) -> f64 {
    pixel_sum(img, r) as f64 / r.area() as f64
}

fn haar_value(img: &GrayImage, win: &Rect, a: &Rect, b: &Rect, sigma: f64) -> f64 {
    (mean(img, &scale(a, win)) - mean(img, &scale(b, win))).abs() / sigma
}

pub fn haar(f: &HaarFeature, img: &GrayImage, win: &Rect) -> bool {
    haar_value(img, win, &f.rect_a(), &f.rect_b(), clamped_sigma(img, win)) > f.threshold()
}

/// Centre sampling: canonical index `i` reads source pixel `floor((i + 1/2) * src / dst)`.
fn sample(img: &GrayImage, win: &Rect, x: usize, y: usize) -> u8 {
    let sx = ((x as f64 + 0.5) * win.w as f64 / CANONICAL_W as f64).floor() as usize;
    let sy = ((y as f64 + 0.5) * win.h as f64 / CANONICAL_H as f64).floor() as usize;
    img.get(win.x + sx, win.y + sy)
}

fn separated(pos: &[u8], neg: &[u8], v: u8) -> bool {
    let v = v as i32;
    let above = pos.iter().all(|&p| neg.iter().all(|&n| p as i32 - n as i32 > v));
    let below = neg.iter().all(|&n| pos.iter().all(|&p| n as i32 - p as i32 > v));
    above || below
}

pub fn control_points(f: &ControlPointsFeature, img: &GrayImage, win: &Rect) -> bool {
    let pos: Vec<u8> = f.pos().iter().map(|p| sample(img, win, p.x, p.y)).collect();
    let neg: Vec<u8> = f.neg().iter().map(|p| sample(img, win, p.x, p.y)).collect();
    separated(&pos, &neg, f.v())
}

pub fn nconnexity(f: &NConnexityFeature, img: &GrayImage, win: &Rect) -> bool {
    let pick = |class| {
        f.chain()
            .iter()
            .filter(|c| c.class == class)
            .map(|c| sample(img, win, c.point.x, c.point.y))
            .collect::<Vec<u8>>()
    };
    separated(&pick(PointClass::Pos), &pick(PointClass::Neg), f.v())
}

pub fn mirror(r: &Rect) -> Rect {
    Rect::new(CANONICAL_W - r.x - r.w, r.y, r.w, r.h)
}

pub fn symmetric_diffs(f: &SymmetricHaarFeature, img: &GrayImage, win: &Rect) -> [f64; 3] {
    let s = clamped_sigma(img, win);
    let (z1a, z1b) = f.z1();
    let (z3a, z3b) = f.z3();
    [
        haar_value(img, win, &z1a, &z1b, s),
        haar_value(img, win, &mirror(&z1a), &mirror(&z1b), s),
        haar_value(img, win, &z3a, &z3b, s),
    ]
}

pub fn symmetric_haar(f: &SymmetricHaarFeature, img: &GrayImage, win: &Rect) -> bool {
    let d = symmetric_diffs(f, img, win);
    let t = f.thresholds();
    let asym = (d[0] - d[1]).abs();
    let dominance = if cfg!(feature = "condition5-literal") { asym - d[2] } else { d[2] - asym };
    d[0] > t.t1 && d[1] > t.t2 && d[2] > t.t3 && asym < t.t_diff1 && dominance > t.t_diff2
}

pub fn feature(f: &Feature, img: &GrayImage, win: &Rect) -> bool {
    match f {
        Feature::Haar(f) => haar(f, img, win),
        Feature::ControlPoints(f) => control_points(f, img, win),
        Feature::SymmetricHaar(f) => symmetric_haar(f, img, win),
        Feature::NConnexity(f) => nconnexity(f, img, win),
    }
}

/// Random window of at least canonical size inside a `w`x`h` frame.
pub fn random_window<R: Rng>(w: usize, h: usize, rng: &mut R) -> Rect {
    let ww = rng.gen_range(CANONICAL_W..=w);
    let wh = rng.gen_range(CANONICAL_H..=h);
    Rect::new(rng.gen_range(0..=w - ww), rng.gen_range(0..=h - wh), ww, wh)
}

/// All ordered 3-point sequences of distinct pixels in an `n`x`n` grid.
pub fn chain_counts(n: usize) -> (usize, usize) {
    let cells: Vec<(i64, i64)> = (0..n * n).map(|i| ((i % n) as i64, (i / n) as i64)).collect();
    let adjacent = |a: (i64, i64), b: (i64, i64)| (a.0 - b.0).abs().max((a.1 - b.1).abs()) == 1;
    let (mut chains, mut triples) = (0, 0);
    for &a in &cells {
        for &b in &cells {
            for &c in &cells {
                if a == b || b == c || a == c {
                    continue;
                }
                triples += 1;
                if adjacent(a, b) && adjacent(b, c) {
                    chains += 1;
                }
            }
        }
    }
    (chains, triples)
}
