//! File formats, dataset ingestion and the command implementations behind
//! the `boostdet` binary.

pub mod annotations;
pub mod commands;
pub mod dataset;
pub mod model_file;
pub mod pgm;
pub mod synth;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::boosting::BoostError;
use crate::features::FeatureError;
use crate::imaging::ImagingError;
use crate::learner::LearnerError;

/// A parse failure in a line-oriented text file.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl LineError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        LineError { line, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Pgm(#[from] pgm::PgmFileError),
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: LineError },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Boost(#[from] BoostError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AppError + '_ {
    move |source| AppError::Io { path: path.to_path_buf(), source }
}

pub(crate) fn read_text(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

pub(crate) fn parse_err(path: &Path) -> impl FnOnce(LineError) -> AppError + '_ {
    move |source| AppError::Parse { path: path.to_path_buf(), source }
}
