//! The four weak-feature families and their boolean evaluation rules.
//!
//! All feature geometry lives in canonical window coordinates
//! ([`CANONICAL_W`] x [`CANONICAL_H`]). A [`WindowView`] binds a feature to
//! an arbitrary window of a frame:
//!
//! * area-based families (Haar, symmetric Haar) scale their rects by
//!   `(win.w / CANONICAL_W, win.h / CANONICAL_H)` with floor rounding and
//!   read rectangle means from the integral image, normalized by the
//!   window standard deviation;
//! * pixel-based families (control points, N-connexity) read raw pixels at
//!   the nearest-neighbour position, so evaluating on a frame window gives
//!   the same answer as evaluating on [`extract_window`] of that window.
//!
//! [`extract_window`]: crate::imaging::extract_window

use std::fmt;

use thiserror::Error;

use crate::imaging::{nearest_index, GrayImage, IntegralImage, Rect};

pub const CANONICAL_W: usize = 32;
pub const CANONICAL_H: usize = 24;

/// Maximum points in one control-points class.
pub const MAX_CLASS_POINTS: usize = 6;
pub const MIN_CHAIN_LEN: usize = 2;
pub const MAX_CHAIN_LEN: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("rect {0} does not fit the canonical window")]
    RectOutOfWindow(Rect),
    #[error("left-zone rect {0} crosses the window's vertical midline")]
    NotInLeftHalf(Rect),
    #[error("middle-zone rect {0} is not centred on the window")]
    NotCentered(Rect),
    #[error("threshold {name} = {value} must be finite and non-negative")]
    BadThreshold { name: &'static str, value: f64 },
    #[error("{class} class holds {count} points, expected 1..={max}", max = MAX_CLASS_POINTS)]
    ClassSize { class: PointClass, count: usize },
    #[error("point {0} lies outside the canonical window")]
    PointOutOfWindow(Point),
    #[error("point {0} appears twice")]
    DuplicatePoint(Point),
    #[error("chain is not an 8-connected sequence of 2..=12 distinct in-window points")]
    InvalidChain,
    #[error("chain needs at least one positive and one negative point")]
    MissingClass,
    #[error("separation threshold must be at least 1")]
    ZeroSeparation,
    #[error("scaled rect {rect} falls outside window {window}")]
    ScaledOutOfBounds { rect: Rect, window: Rect },
    #[error("window {window} does not fit a {width}x{height} frame")]
    WindowOutOfFrame { window: Rect, width: usize, height: usize },
    #[error("integral image is {ii_w}x{ii_h} but raw image is {raw_w}x{raw_h}")]
    SizeMismatch {
        ii_w: usize,
        ii_h: usize,
        raw_w: usize,
        raw_h: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: usize,
    pub y: usize,
}

impl Point {
    pub const fn new(x: usize, y: usize) -> Self {
        Point { x, y }
    }

    pub fn chebyshev(&self, other: &Point) -> usize {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }

    fn in_canonical(&self) -> bool {
        self.x < CANONICAL_W && self.y < CANONICAL_H
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointClass {
    Pos,
    Neg,
}

impl PointClass {
    pub fn flipped(self) -> Self {
        match self {
            PointClass::Pos => PointClass::Neg,
            PointClass::Neg => PointClass::Pos,
        }
    }
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointClass::Pos => "positive",
            PointClass::Neg => "negative",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainPoint {
    pub point: Point,
    pub class: PointClass,
}

impl ChainPoint {
    pub const fn new(x: usize, y: usize, class: PointClass) -> Self {
        ChainPoint { point: Point::new(x, y), class }
    }
}

/// Feature family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Haar,
    ControlPoints,
    SymmetricHaar,
    NConnexity,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 4] = [
        FeatureKind::Haar,
        FeatureKind::ControlPoints,
        FeatureKind::SymmetricHaar,
        FeatureKind::NConnexity,
    ];

    /// Short name used on the command line and in model files.
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Haar => "haar",
            FeatureKind::ControlPoints => "cp",
            FeatureKind::SymmetricHaar => "symhaar",
            FeatureKind::NConnexity => "nconnex",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Whether the family reads raw pixels rather than the integral image.
    pub fn is_pixel_based(self) -> bool {
        matches!(self, FeatureKind::ControlPoints | FeatureKind::NConnexity)
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_threshold(name: &'static str, value: f64) -> Result<(), FeatureError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(FeatureError::BadThreshold { name, value })
    }
}

fn check_canonical_rect(r: &Rect) -> Result<(), FeatureError> {
    if r.fits(CANONICAL_W, CANONICAL_H) {
        Ok(())
    } else {
        Err(FeatureError::RectOutOfWindow(*r))
    }
}

/// Two-rectangle Haar-like feature: fires when the variance-normalized
/// difference of the rectangle means exceeds `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarFeature {
    rect_a: Rect,
    rect_b: Rect,
    threshold: f64,
}

impl HaarFeature {
    pub fn new(rect_a: Rect, rect_b: Rect, threshold: f64) -> Result<Self, FeatureError> {
        check_canonical_rect(&rect_a)?;
        check_canonical_rect(&rect_b)?;
        check_threshold("threshold", threshold)?;
        Ok(HaarFeature { rect_a, rect_b, threshold })
    }

    pub fn rect_a(&self) -> Rect {
        self.rect_a
    }

    pub fn rect_b(&self) -> Rect {
        self.rect_b
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// Two point classes that must separate by more than `v` luminance levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlPointsFeature {
    pos: Vec<Point>,
    neg: Vec<Point>,
    v: u8,
}

fn check_class(points: &[Point], class: PointClass) -> Result<(), FeatureError> {
    if points.is_empty() || points.len() > MAX_CLASS_POINTS {
        return Err(FeatureError::ClassSize { class, count: points.len() });
    }
    for (i, p) in points.iter().enumerate() {
        if !p.in_canonical() {
            return Err(FeatureError::PointOutOfWindow(*p));
        }
        if points[..i].contains(p) {
            return Err(FeatureError::DuplicatePoint(*p));
        }
    }
    Ok(())
}

impl ControlPointsFeature {
    pub fn new(pos: Vec<Point>, neg: Vec<Point>, v: u8) -> Result<Self, FeatureError> {
        check_class(&pos, PointClass::Pos)?;
        check_class(&neg, PointClass::Neg)?;
        if v == 0 {
            return Err(FeatureError::ZeroSeparation);
        }
        Ok(ControlPointsFeature { pos, neg, v })
    }

    pub fn pos(&self) -> &[Point] {
        &self.pos
    }

    pub fn neg(&self) -> &[Point] {
        &self.neg
    }

    pub fn v(&self) -> u8 {
        self.v
    }
}

/// The five thresholds of a symmetric Haar feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricThresholds {
    /// Minimum left-zone difference.
    pub t1: f64,
    /// Minimum right-zone difference.
    pub t2: f64,
    /// Minimum middle-zone difference.
    pub t3: f64,
    /// Symmetry tolerance between left and right differences.
    pub t_diff1: f64,
    /// Margin by which the middle difference must dominate the asymmetry.
    pub t_diff2: f64,
}

impl SymmetricThresholds {
    fn validate(&self) -> Result<(), FeatureError> {
        check_threshold("t1", self.t1)?;
        check_threshold("t2", self.t2)?;
        check_threshold("t3", self.t3)?;
        check_threshold("t_diff1", self.t_diff1)?;
        check_threshold("t_diff2", self.t_diff2)
    }
}

/// Three Haar pairs: a left one (Z1), its mirror image (Z2) and a centred
/// one (Z3). Z2 is never stored; it is derived with [`mirror_rect`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricHaarFeature {
    z1a: Rect,
    z1b: Rect,
    z3a: Rect,
    z3b: Rect,
    thresholds: SymmetricThresholds,
}

/// True when `r` has its horizontal centre within one pixel of the window centre.
pub fn is_centered(r: &Rect, window_w: usize) -> bool {
    (2 * r.x + r.w).abs_diff(window_w) <= 2
}

impl SymmetricHaarFeature {
    pub fn new(
        z1a: Rect,
        z1b: Rect,
        z3a: Rect,
        z3b: Rect,
        thresholds: SymmetricThresholds,
    ) -> Result<Self, FeatureError> {
        for r in [&z1a, &z1b, &z3a, &z3b] {
            check_canonical_rect(r)?;
        }
        for r in [&z1a, &z1b] {
            if r.right() > CANONICAL_W / 2 {
                return Err(FeatureError::NotInLeftHalf(*r));
            }
        }
        for r in [&z3a, &z3b] {
            if !is_centered(r, CANONICAL_W) {
                return Err(FeatureError::NotCentered(*r));
            }
        }
        thresholds.validate()?;
        Ok(SymmetricHaarFeature { z1a, z1b, z3a, z3b, thresholds })
    }

    pub fn z1(&self) -> (Rect, Rect) {
        (self.z1a, self.z1b)
    }

    pub fn z2(&self) -> (Rect, Rect) {
        (mirror_rect(&self.z1a, CANONICAL_W), mirror_rect(&self.z1b, CANONICAL_W))
    }

    pub fn z3(&self) -> (Rect, Rect) {
        (self.z3a, self.z3b)
    }

    pub fn thresholds(&self) -> SymmetricThresholds {
        self.thresholds
    }

    /// Whether the middle pair maps onto itself under a horizontal mirror,
    /// either rect by rect or by swapping A and B.
    pub fn has_self_mirrored_z3(&self) -> bool {
        let ma = mirror_rect(&self.z3a, CANONICAL_W);
        let mb = mirror_rect(&self.z3b, CANONICAL_W);
        (ma == self.z3a && mb == self.z3b) || (ma == self.z3b && mb == self.z3a)
    }
}

/// Control-points feature whose points form an 8-connected chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NConnexityFeature {
    chain: Vec<ChainPoint>,
    v: u8,
}

impl NConnexityFeature {
    pub fn new(chain: Vec<ChainPoint>, v: u8) -> Result<Self, FeatureError> {
        let points: Vec<Point> = chain.iter().map(|c| c.point).collect();
        if !validate_chain(&points, CANONICAL_W, CANONICAL_H) {
            return Err(FeatureError::InvalidChain);
        }
        let has_pos = chain.iter().any(|c| c.class == PointClass::Pos);
        let has_neg = chain.iter().any(|c| c.class == PointClass::Neg);
        if !(has_pos && has_neg) {
            return Err(FeatureError::MissingClass);
        }
        if v == 0 {
            return Err(FeatureError::ZeroSeparation);
        }
        Ok(NConnexityFeature { chain, v })
    }

    pub fn chain(&self) -> &[ChainPoint] {
        &self.chain
    }

    pub fn v(&self) -> u8 {
        self.v
    }
}

/// Any of the four families.
#[derive(Debug, Clone, PartialEq)]
pub enum Feature {
    Haar(HaarFeature),
    ControlPoints(ControlPointsFeature),
    SymmetricHaar(SymmetricHaarFeature),
    NConnexity(NConnexityFeature),
}

impl Feature {
    pub fn kind(&self) -> FeatureKind {
        match self {
            Feature::Haar(_) => FeatureKind::Haar,
            Feature::ControlPoints(_) => FeatureKind::ControlPoints,
            Feature::SymmetricHaar(_) => FeatureKind::SymmetricHaar,
            Feature::NConnexity(_) => FeatureKind::NConnexity,
        }
    }

    pub fn evaluate(&self, view: &WindowView<'_>) -> Result<bool, FeatureError> {
        eval_feature(self, view)
    }
}

impl From<HaarFeature> for Feature {
    fn from(f: HaarFeature) -> Self {
        Feature::Haar(f)
    }
}

impl From<ControlPointsFeature> for Feature {
    fn from(f: ControlPointsFeature) -> Self {
        Feature::ControlPoints(f)
    }
}

impl From<SymmetricHaarFeature> for Feature {
    fn from(f: SymmetricHaarFeature) -> Self {
        Feature::SymmetricHaar(f)
    }
}

impl From<NConnexityFeature> for Feature {
    fn from(f: NConnexityFeature) -> Self {
        Feature::NConnexity(f)
    }
}

/// A window of a frame, with the frame's raw pixels and integral image.
#[derive(Debug, Clone, Copy)]
pub struct WindowView<'a> {
    ii: &'a IntegralImage,
    raw: &'a GrayImage,
    win: Rect,
}

impl<'a> WindowView<'a> {
    pub fn new(ii: &'a IntegralImage, raw: &'a GrayImage, win: Rect) -> Result<Self, FeatureError> {
        if ii.width() != raw.width() || ii.height() != raw.height() {
            return Err(FeatureError::SizeMismatch {
                ii_w: ii.width(),
                ii_h: ii.height(),
                raw_w: raw.width(),
                raw_h: raw.height(),
            });
        }
        if !win.fits(raw.width(), raw.height()) {
            return Err(FeatureError::WindowOutOfFrame {
                window: win,
                width: raw.width(),
                height: raw.height(),
            });
        }
        Ok(WindowView { ii, raw, win })
    }

    /// View covering the whole image.
    pub fn full(ii: &'a IntegralImage, raw: &'a GrayImage) -> Result<Self, FeatureError> {
        Self::new(ii, raw, raw.full_rect())
    }

    pub fn window(&self) -> Rect {
        self.win
    }

    pub fn integral(&self) -> &'a IntegralImage {
        self.ii
    }

    pub fn raw(&self) -> &'a GrayImage {
        self.raw
    }

    /// Maps a canonical rect into frame coordinates.
    pub fn scale_rect(&self, r: &Rect) -> Result<Rect, FeatureError> {
        let win = &self.win;
        let scaled = Rect::new(
            win.x + r.x * win.w / CANONICAL_W,
            win.y + r.y * win.h / CANONICAL_H,
            (r.w * win.w / CANONICAL_W).max(1),
            (r.h * win.h / CANONICAL_H).max(1),
        );
        if scaled.right() > win.right() || scaled.bottom() > win.bottom() {
            return Err(FeatureError::ScaledOutOfBounds { rect: scaled, window: *win });
        }
        Ok(scaled)
    }

    /// Raw pixel at the nearest-neighbour position of a canonical point.
    #[inline]
    pub fn pixel(&self, p: &Point) -> u8 {
        let x = self.win.x + nearest_index(p.x, self.win.w, CANONICAL_W);
        let y = self.win.y + nearest_index(p.y, self.win.h, CANONICAL_H);
        self.raw.get(x, y)
    }

    fn sigma(&self) -> f64 {
        self.ii.window_stats_unchecked(&self.win).std_dev
    }

    fn mean(&self, r: &Rect) -> Result<f64, FeatureError> {
        let s = self.scale_rect(r)?;
        Ok(self.ii.sum_unchecked(&s) as f64 / s.area() as f64)
    }

    /// `|mean(a) - mean(b)| / sigma` for a canonical rect pair.
    pub fn normalized_difference(&self, a: &Rect, b: &Rect, sigma: f64) -> Result<f64, FeatureError> {
        Ok((self.mean(a)? - self.mean(b)?).abs() / sigma)
    }
}

pub fn eval_haar(f: &HaarFeature, view: &WindowView<'_>) -> Result<bool, FeatureError> {
    let sigma = view.sigma();
    let diff = view.normalized_difference(&f.rect_a, &f.rect_b, sigma)?;
    Ok(diff > f.threshold)
}

/// The separation rule shared by both pixel-based families.
fn separated(pos: impl Iterator<Item = u8>, neg: impl Iterator<Item = u8>, v: u8) -> bool {
    let (mut pos_min, mut pos_max) = (u8::MAX, u8::MIN);
    for p in pos {
        pos_min = pos_min.min(p);
        pos_max = pos_max.max(p);
    }
    let (mut neg_min, mut neg_max) = (u8::MAX, u8::MIN);
    for p in neg {
        neg_min = neg_min.min(p);
        neg_max = neg_max.max(p);
    }
    let v = v as i32;
    pos_min as i32 - neg_max as i32 > v || neg_min as i32 - pos_max as i32 > v
}

pub fn eval_control_points(f: &ControlPointsFeature, view: &WindowView<'_>) -> bool {
    separated(
        f.pos.iter().map(|p| view.pixel(p)),
        f.neg.iter().map(|p| view.pixel(p)),
        f.v,
    )
}

/// The three normalized differences `[Diff1, Diff2, Diff3]`.
pub fn symmetric_diffs(f: &SymmetricHaarFeature, view: &WindowView<'_>) -> Result<[f64; 3], FeatureError> {
    let sigma = view.sigma();
    let (z2a, z2b) = f.z2();
    Ok([
        view.normalized_difference(&f.z1a, &f.z1b, sigma)?,
        view.normalized_difference(&z2a, &z2b, sigma)?,
        view.normalized_difference(&f.z3a, &f.z3b, sigma)?,
    ])
}

/// Condition 5 in its configured orientation.
#[inline]
pub fn middle_dominates(diffs: &[f64; 3], t_diff2: f64) -> bool {
    let asym = (diffs[0] - diffs[1]).abs();
    if cfg!(feature = "condition5-literal") {
        asym - diffs[2] > t_diff2
    } else {
        diffs[2] - asym > t_diff2
    }
}

pub fn eval_symmetric_haar(f: &SymmetricHaarFeature, view: &WindowView<'_>) -> Result<bool, FeatureError> {
    let d = symmetric_diffs(f, view)?;
    let t = &f.thresholds;
    Ok(d[0] > t.t1
        && d[1] > t.t2
        && d[2] > t.t3
        && (d[0] - d[1]).abs() < t.t_diff1
        && middle_dominates(&d, t.t_diff2))
}

pub fn eval_nconnexity(f: &NConnexityFeature, view: &WindowView<'_>) -> bool {
    let values = |class: PointClass| {
        f.chain
            .iter()
            .filter(move |c| c.class == class)
            .map(|c| view.pixel(&c.point))
    };
    separated(values(PointClass::Pos), values(PointClass::Neg), f.v)
}

pub fn eval_feature(f: &Feature, view: &WindowView<'_>) -> Result<bool, FeatureError> {
    match f {
        Feature::Haar(h) => eval_haar(h, view),
        Feature::ControlPoints(c) => Ok(eval_control_points(c, view)),
        Feature::SymmetricHaar(s) => eval_symmetric_haar(s, view),
        Feature::NConnexity(n) => Ok(eval_nconnexity(n, view)),
    }
}

/// Horizontal mirror of `r` inside a window `window_w` pixels wide.
pub fn mirror_rect(r: &Rect, window_w: usize) -> Rect {
    Rect::new(window_w - r.x - r.w, r.y, r.w, r.h)
}

/// Checks the N-connexity chain shape: 2..=12 distinct in-bounds points,
/// consecutive points 8-adjacent.
pub fn validate_chain(points: &[Point], width: usize, height: usize) -> bool {
    if points.len() < MIN_CHAIN_LEN || points.len() > MAX_CHAIN_LEN {
        return false;
    }
    if points.iter().any(|p| p.x >= width || p.y >= height) {
        return false;
    }
    if points.windows(2).any(|w| w[0].chebyshev(&w[1]) != 1) {
        return false;
    }
    points
        .iter()
        .enumerate()
        .all(|(i, p)| !points[..i].contains(p))
}
