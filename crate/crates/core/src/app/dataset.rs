//! Dataset manifests.
//!
//! ```text
//! # one record per line; paths are relative to the manifest
//! pos crops/pos_0000.pgm
//! pos frames/frame_0003.pgm 40 12 48 36   # crop box, resampled to 32x24
//! neg crops/neg_0000.pgm
//! annotations annotations.txt
//! ```

use std::path::{Path, PathBuf};

use crate::boosting::{Label, LabeledSample};
use crate::evalkit::GroundTruthFrame;
use crate::features::{CANONICAL_H, CANONICAL_W};
use crate::imaging::{extract_window, Rect};

use super::annotations::{parse_annotations, parse_box};
use super::pgm::load_pgm;
use super::{parse_err, read_text, AppError, LineError};

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRef {
    pub path: PathBuf,
    /// Region to crop; the whole image when absent.
    pub crop: Option<Rect>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetManifest {
    pub positives: Vec<ImageRef>,
    pub negatives: Vec<ImageRef>,
    pub annotations: Option<PathBuf>,
}

impl DatasetManifest {
    pub fn parse(text: &str, base: &Path) -> Result<Self, LineError> {
        let mut m = DatasetManifest::default();
        for (idx, raw) in text.lines().enumerate() {
            let n = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match (fields[0], fields.len()) {
                ("pos" | "neg", 2 | 6) => {
                    let crop = if fields.len() == 6 { Some(parse_box(&fields[2..], n)?) } else { None };
                    let r = ImageRef { path: base.join(fields[1]), crop };
                    if fields[0] == "pos" {
                        m.positives.push(r);
                    } else {
                        m.negatives.push(r);
                    }
                }
                ("annotations", 2) => {
                    if m.annotations.is_some() {
                        return Err(LineError::new(n, "annotations declared twice"));
                    }
                    m.annotations = Some(base.join(fields[1]));
                }
                (kind, _) => {
                    return Err(LineError::new(
                        n,
                        format!("bad record {kind:?}: expected `pos|neg <path> [x y w h]` or `annotations <path>`"),
                    ))
                }
            }
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = read_text(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(parse_err(path))
    }

    /// Loads every referenced image as a canonical training sample.
    pub fn load_samples(&self) -> Result<Vec<LabeledSample>, AppError> {
        if self.positives.is_empty() {
            return Err(AppError::Data("manifest lists no positive samples".into()));
        }
        if self.negatives.is_empty() {
            return Err(AppError::Data("manifest lists no negative samples".into()));
        }
        let pos = self.positives.iter().map(|r| (r, Label::Pos));
        let neg = self.negatives.iter().map(|r| (r, Label::Neg));
        pos.chain(neg)
            .map(|(r, label)| {
                let img = load_pgm(&r.path)?;
                let region = r.crop.unwrap_or(img.full_rect());
                if !region.fits(img.width(), img.height()) {
                    return Err(AppError::Data(format!(
                        "{}: crop {region} outside the {}x{} image",
                        r.path.display(),
                        img.width(),
                        img.height()
                    )));
                }
                let window = if region == img.full_rect() && (img.width(), img.height()) == (CANONICAL_W, CANONICAL_H) {
                    img
                } else {
                    extract_window(&img, &region, CANONICAL_W, CANONICAL_H)?
                };
                Ok(LabeledSample::new(window, label)?)
            })
            .collect()
    }

    pub fn load_annotations(&self) -> Result<Vec<GroundTruthFrame>, AppError> {
        match &self.annotations {
            Some(p) => load_annotations(p),
            None => Ok(Vec::new()),
        }
    }
}

pub fn load_annotations(path: &Path) -> Result<Vec<GroundTruthFrame>, AppError> {
    parse_annotations(&read_text(path)?).map_err(parse_err(path))
}
