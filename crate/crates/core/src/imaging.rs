//! Grayscale rasters, summed-area tables and per-window statistics.

use std::fmt;

use thiserror::Error;

/// Floor applied to the window standard deviation so that flat windows
/// never divide by zero during normalization.
pub const SIGMA_MIN: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImagingError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    PixelCount { expected: usize, actual: usize },
    #[error("rect {rect} lies outside the {width}x{height} image")]
    OutOfBounds { rect: Rect, width: usize, height: usize },
    #[error("target size must be at least 1x1, got {width}x{height}")]
    EmptyTarget { width: usize, height: usize },
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn right(&self) -> usize {
        self.x + self.w
    }

    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    /// True when the rect is non-empty and fits inside a `width`x`height` frame.
    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.w >= 1 && self.h >= 1 && self.right() <= width && self.bottom() <= height
    }

    pub fn intersection_area(&self, other: &Rect) -> usize {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 <= x0 || y1 <= y0 {
            0
        } else {
            (x1 - x0) * (y1 - y0)
        }
    }

    /// Intersection over union. Two empty rects have IoU 0.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Multiplies every coordinate by an integer factor.
    pub fn scaled_by(&self, factor: usize) -> Rect {
        Rect::new(self.x * factor, self.y * factor, self.w * factor, self.h * factor)
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}x{})", self.x, self.y, self.w, self.h)
    }
}

/// 8-bit luminance raster stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::EmptyImage { width, height });
        }
        if pixels.len() != width * height {
            return Err(ImagingError::PixelCount {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImagingError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn<F>(width: usize, height: usize, mut f: F) -> Result<Self, ImagingError>
    where
        F: FnMut(usize, usize) -> u8,
    {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn full_rect(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    /// Pixel at `(x, y)`. Panics when out of range.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of range");
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of range");
        self.pixels[y * self.width + x] = value;
    }

    /// Left-right mirror image.
    pub fn mirrored(&self) -> GrayImage {
        let w = self.width;
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks_exact(w) {
            pixels.extend(row.iter().rev());
        }
        GrayImage { width: w, height: self.height, pixels }
    }

    fn check(&self, r: &Rect) -> Result<(), ImagingError> {
        if r.fits(self.width, self.height) {
            Ok(())
        } else {
            Err(ImagingError::OutOfBounds {
                rect: *r,
                width: self.width,
                height: self.height,
            })
        }
    }
}

/// Summed-area tables of pixel values and of squared pixel values.
///
/// Both tables carry a zero border row and column, so entry `(x, y)` holds
/// the sum over all pixels strictly above and to the left of `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    sums: Vec<u64>,
    squared_sums: Vec<u64>,
}

impl IntegralImage {
    pub fn new(img: &GrayImage) -> Self {
        build_integral(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Table entry at `(x, y)` with `x <= width`, `y <= height`.
    pub fn sum_at(&self, x: usize, y: usize) -> u64 {
        self.sums[y * (self.width + 1) + x]
    }

    pub fn squared_sum_at(&self, x: usize, y: usize) -> u64 {
        self.squared_sums[y * (self.width + 1) + x]
    }

    pub fn contains(&self, r: &Rect) -> bool {
        r.fits(self.width, self.height)
    }

    fn check(&self, r: &Rect) -> Result<(), ImagingError> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(ImagingError::OutOfBounds {
                rect: *r,
                width: self.width,
                height: self.height,
            })
        }
    }

    #[inline]
    fn lookup(table: &[u64], stride: usize, r: &Rect) -> u64 {
        let top = r.y * stride;
        let bottom = (r.y + r.h) * stride;
        let (left, right) = (r.x, r.x + r.w);
        // a + d >= b + c holds for cumulative tables, so this never underflows.
        table[bottom + right] + table[top + left] - table[top + right] - table[bottom + left]
    }

    /// Rectangle sum without bounds checking beyond slice indexing.
    #[inline]
    pub(crate) fn sum_unchecked(&self, r: &Rect) -> u64 {
        Self::lookup(&self.sums, self.width + 1, r)
    }

    #[inline]
    pub(crate) fn squared_sum_unchecked(&self, r: &Rect) -> u64 {
        Self::lookup(&self.squared_sums, self.width + 1, r)
    }

    pub fn rect_sum(&self, r: &Rect) -> Result<u64, ImagingError> {
        self.check(r)?;
        Ok(self.sum_unchecked(r))
    }

    pub fn rect_squared_sum(&self, r: &Rect) -> Result<u64, ImagingError> {
        self.check(r)?;
        Ok(self.squared_sum_unchecked(r))
    }

    pub fn window_stats(&self, win: &Rect) -> Result<WindowStats, ImagingError> {
        self.check(win)?;
        Ok(self.window_stats_unchecked(win))
    }

    pub(crate) fn window_stats_unchecked(&self, win: &Rect) -> WindowStats {
        let area = win.area() as u128;
        let sum = self.sum_unchecked(win) as u128;
        let sq = self.squared_sum_unchecked(win) as u128;
        // area^2 * variance, computed exactly in integers.
        let scaled_var = area * sq - sum * sum;
        let mean = sum as f64 / area as f64;
        let raw = (scaled_var as f64).sqrt() / area as f64;
        WindowStats {
            mean,
            std_dev: raw.max(SIGMA_MIN),
        }
    }
}

/// Builds both summed-area tables in one pass.
pub fn build_integral(img: &GrayImage) -> IntegralImage {
    let (w, h) = (img.width, img.height);
    let stride = w + 1;
    let mut sums = vec![0u64; stride * (h + 1)];
    let mut squared_sums = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u64;
        let mut row_sq = 0u64;
        for x in 0..w {
            let p = img.pixels[y * w + x] as u64;
            row += p;
            row_sq += p * p;
            let idx = (y + 1) * stride + x + 1;
            sums[idx] = sums[idx - stride] + row;
            squared_sums[idx] = squared_sums[idx - stride] + row_sq;
        }
    }
    IntegralImage {
        width: w,
        height: h,
        sums,
        squared_sums,
    }
}

pub fn rect_sum(ii: &IntegralImage, r: &Rect) -> Result<u64, ImagingError> {
    ii.rect_sum(r)
}

/// Mean and clamped population standard deviation of a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub mean: f64,
    pub std_dev: f64,
}

pub fn window_stats(ii: &IntegralImage, win: &Rect) -> Result<WindowStats, ImagingError> {
    ii.window_stats(win)
}

/// Source index sampled for target index `i` when resampling `src` pixels
/// onto `target` pixels: `floor((i + 0.5) * src / target)`.
#[inline]
pub fn nearest_index(i: usize, src: usize, target: usize) -> usize {
    ((2 * i + 1) * src) / (2 * target)
}

/// Nearest-neighbour resampled copy of `win` at `target_w`x`target_h`.
pub fn extract_window(
    img: &GrayImage,
    win: &Rect,
    target_w: usize,
    target_h: usize,
) -> Result<GrayImage, ImagingError> {
    img.check(win)?;
    if target_w == 0 || target_h == 0 {
        return Err(ImagingError::EmptyTarget {
            width: target_w,
            height: target_h,
        });
    }
    let cols: Vec<usize> = (0..target_w)
        .map(|i| win.x + nearest_index(i, win.w, target_w))
        .collect();
    let mut pixels = Vec::with_capacity(target_w * target_h);
    for j in 0..target_h {
        let sy = win.y + nearest_index(j, win.h, target_h);
        let row = &img.pixels[sy * img.width..(sy + 1) * img.width];
        pixels.extend(cols.iter().map(|&sx| row[sx]));
    }
    GrayImage::new(target_w, target_h, pixels)
}
