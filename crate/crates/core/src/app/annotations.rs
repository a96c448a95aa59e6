//! Ground-truth annotation files.
//!
//! One box per line: `frame_path x y w h`. A line holding only a path
//! declares a frame without targets. `#` starts a comment; blank lines are
//! ignored. Frames appear in order of first mention.

use crate::evalkit::GroundTruthFrame;
use crate::imaging::Rect;

use super::LineError;

pub fn parse_annotations(text: &str) -> Result<Vec<GroundTruthFrame>, LineError> {
    let mut frames: Vec<GroundTruthFrame> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let frame_id = fields[0];
        let rect = match fields.len() {
            1 => None,
            5 => Some(parse_box(&fields[1..], line_no)?),
            n => {
                return Err(LineError::new(
                    line_no,
                    format!("expected `frame_path x y w h`, found {n} fields"),
                ))
            }
        };
        let pos = match frames.iter().position(|f| f.frame_id == frame_id) {
            Some(p) => p,
            None => {
                frames.push(GroundTruthFrame { frame_id: frame_id.to_string(), boxes: Vec::new() });
                frames.len() - 1
            }
        };
        if let Some(r) = rect {
            frames[pos].boxes.push(r);
        }
    }
    Ok(frames)
}

/// Parses four integer fields into a rect with positive extents.
pub(crate) fn parse_box(fields: &[&str], line_no: usize) -> Result<Rect, LineError> {
    let mut v = [0i64; 4];
    for (slot, (name, field)) in v.iter_mut().zip(["x", "y", "w", "h"].iter().zip(fields)) {
        *slot = field
            .parse()
            .map_err(|_| LineError::new(line_no, format!("{name} = {field:?} is not an integer")))?;
    }
    let [x, y, w, h] = v;
    if x < 0 || y < 0 {
        return Err(LineError::new(line_no, "box origin must be non-negative"));
    }
    if w <= 0 || h <= 0 {
        return Err(LineError::new(line_no, "box extents must be positive"));
    }
    Ok(Rect::new(x as usize, y as usize, w as usize, h as usize))
}

pub fn format_annotations(frames: &[GroundTruthFrame]) -> String {
    let mut out = String::new();
    for f in frames {
        if f.boxes.is_empty() {
            out.push_str(&format!("{}\n", f.frame_id));
        }
        for b in &f.boxes {
            out.push_str(&format!("{} {} {} {} {}\n", f.frame_id, b.x, b.y, b.w, b.h));
        }
    }
    out
}
