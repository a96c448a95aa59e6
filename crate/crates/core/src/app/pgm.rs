//! Binary PGM ("P5", maxval 255) reading and writing.

use std::path::Path;

use thiserror::Error;

use crate::imaging::GrayImage;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PgmErrorKind {
    #[error("unsupported netpbm format {0:?}, only binary P5 is read")]
    Unsupported(String),
    #[error("not a PGM file")]
    BadMagic,
    #[error("expected a decimal header field")]
    BadHeaderField,
    #[error("maxval {0} is not supported, expected 255")]
    BadMaxval(u32),
    #[error("image dimensions must be positive")]
    ZeroDimension,
    #[error("missing whitespace after maxval")]
    MissingSeparator,
    #[error("pixel data truncated: {expected} bytes expected, {actual} present")]
    Truncated { expected: usize, actual: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("byte {offset}: {kind}")]
pub struct PgmError {
    pub offset: usize,
    pub kind: PgmErrorKind,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn err(&self, kind: PgmErrorKind) -> PgmError {
        PgmError { offset: self.pos, kind }
    }

    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<u32, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as u32))
                .ok_or(PgmError { offset: start, kind: PgmErrorKind::BadHeaderField })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(PgmErrorKind::BadHeaderField));
        }
        Ok(value)
    }
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(PgmError { offset: 0, kind: PgmErrorKind::BadMagic });
    }
    if bytes[1] != b'5' {
        let magic = String::from_utf8_lossy(&bytes[..2]).into_owned();
        let kind = if bytes[1].is_ascii_digit() {
            PgmErrorKind::Unsupported(magic)
        } else {
            PgmErrorKind::BadMagic
        };
        return Err(PgmError { offset: 0, kind });
    }
    let mut h = Header { bytes, pos: 2 };
    let width = h.number()? as usize;
    let height = h.number()? as usize;
    if width == 0 || height == 0 {
        return Err(h.err(PgmErrorKind::ZeroDimension));
    }
    h.skip_space_and_comments();
    let maxval_at = h.pos;
    let maxval = h.number()?;
    if maxval != 255 {
        return Err(PgmError { offset: maxval_at, kind: PgmErrorKind::BadMaxval(maxval) });
    }
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(h.err(PgmErrorKind::MissingSeparator)),
    }
    let expected = width * height;
    let data = &bytes[h.pos..];
    if data.len() < expected {
        return Err(PgmError {
            offset: bytes.len(),
            kind: PgmErrorKind::Truncated { expected, actual: data.len() },
        });
    }
    Ok(GrayImage::new(width, height, data[..expected].to_vec()).expect("dimensions checked above"))
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

#[derive(Debug, Error)]
pub enum PgmFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: PgmError },
}

pub fn load_pgm(path: &Path) -> Result<GrayImage, PgmFileError> {
    let bytes = std::fs::read(path).map_err(|source| PgmFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_pgm(&bytes).map_err(|source| PgmFileError::Format {
        path: path.display().to_string(),
        source,
    })
}

pub fn save_pgm(path: &Path, img: &GrayImage) -> std::io::Result<()> {
    std::fs::write(path, encode_pgm(img))
}
