//! Boosted object detection on grayscale frames.
//!
//! The pipeline: [`imaging`] builds integral images, [`features`] defines four
//! binary feature families over a 32x24 window, [`learner`] searches feature
//! space with a seeded genetic algorithm, [`boosting`] combines the winners with
//! discrete AdaBoost, [`detector`] scans frames over a scale pyramid and
//! [`evalkit`] scores detections against ground truth.
//!
//! [`app`] holds the file formats (PGM, annotations, model text, manifests),
//! a synthetic data generator and the command implementations used by the
//! `boostdet` binary.

pub mod app;
pub mod boosting;
pub mod detector;
pub mod evalkit;
pub mod features;
pub mod imaging;
pub mod learner;

pub use boosting::{
    train, BoostConfig, BoostError, Label, LabeledSample, Polarity, StrongClassifier, WeakClassifier, WeakLearner,
};
pub use detector::{nms, scan, Detection, ScanConfig};
pub use evalkit::{auc, pr_curve, roc_curve, EvalFrame, GroundTruthFrame};
pub use features::{Feature, FeatureKind, CANONICAL_H, CANONICAL_W};
pub use imaging::{build_integral, GrayImage, IntegralImage, Rect};
pub use learner::{GeneticLearner, LearnerConfig};
