//! Discrete AdaBoost: weight bookkeeping, the training loop and the
//! weighted-vote strong classifier.
//!
//! Two points differ from a literal reading of the textbook pseudocode:
//!
//! * **Weight update.** Correctly classified samples are multiplied by
//!   `beta = eps / (1 - eps)` and misclassified ones by 1, then the
//!   distribution is renormalized. Multiplying misclassified samples by 0
//!   would drop exactly the hard examples; that variant is still available
//!   through [`BoostConfig::literal_zero_update`] for study.
//! * **Perfect weak classifiers.** A round with `eps == 0` is kept, with
//!   `eps` clamped to [`EPSILON_MIN`] (vote weight about 13.8), and training
//!   stops there. A round with `eps >= 1/2` stops training without being kept.

use std::io::{self, Write};

use thiserror::Error;

use crate::features::{eval_feature, Feature, FeatureError, WindowView, CANONICAL_H, CANONICAL_W};
use crate::imaging::{build_integral, GrayImage, IntegralImage};

/// Lower clamp applied to the weighted error before computing beta and alpha.
pub const EPSILON_MIN: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("training sample is {width}x{height}, expected the canonical {CANONICAL_W}x{CANONICAL_H}")]
    NotCanonical { width: usize, height: usize },
    #[error("{weights} weights for {samples} samples")]
    LengthMismatch { weights: usize, samples: usize },
    #[error("training set has no {0} samples")]
    EmptyClass(Label),
    #[error("number of rounds must be at least 1")]
    NoRounds,
    #[error("weighted error {0} is outside (0, 1/2)")]
    EpsilonOutOfRange(f64),
    #[error("beta {0} is outside (0, 1)")]
    BetaOutOfRange(f64),
    #[error("weights must be finite, non-negative and not all zero")]
    DegenerateWeights,
    #[error("alpha {0} must be finite and positive")]
    BadAlpha(f64),
    #[error("first weak classifier has weighted error {0}, no better than chance")]
    NoUsefulWeakClassifier(f64),
    #[error("weak learner failed: {0}")]
    Learner(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Pos,
    Neg,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub fn from_sign(value: i32) -> Option<Label> {
        match value {
            1 => Some(Label::Pos),
            -1 => Some(Label::Neg),
            _ => None,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::Pos => "positive",
            Label::Neg => "negative",
        })
    }
}

/// A canonical-size training window with its integral image.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    window: GrayImage,
    integral: IntegralImage,
    label: Label,
}

impl LabeledSample {
    pub fn new(window: GrayImage, label: Label) -> Result<Self, BoostError> {
        if window.width() != CANONICAL_W || window.height() != CANONICAL_H {
            return Err(BoostError::NotCanonical {
                width: window.width(),
                height: window.height(),
            });
        }
        let integral = build_integral(&window);
        Ok(LabeledSample { window, integral, label })
    }

    pub fn window(&self) -> &GrayImage {
        &self.window
    }

    pub fn integral(&self) -> &IntegralImage {
        &self.integral
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn view(&self) -> WindowView<'_> {
        WindowView::full(&self.integral, &self.window).expect("sample tables match the window")
    }
}

/// Per-sample AdaBoost weights, normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDistribution(Vec<f64>);

impl WeightDistribution {
    pub fn uniform(n: usize) -> Self {
        WeightDistribution(vec![1.0 / n as f64; n])
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, BoostError> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(BoostError::DegenerateWeights);
        }
        let z: f64 = weights.iter().sum();
        if z <= 0.0 {
            return Err(BoostError::DegenerateWeights);
        }
        Ok(WeightDistribution(weights.into_iter().map(|w| w / z).collect()))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> i32 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    pub fn flipped(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }

    /// Label assigned when the feature responds with `fired`.
    #[inline]
    pub fn label_for(self, fired: bool) -> Label {
        match (self, fired) {
            (Polarity::Positive, true) | (Polarity::Negative, false) => Label::Pos,
            _ => Label::Neg,
        }
    }
}

/// A feature plus the polarity mapping its boolean response to a label.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakClassifier {
    pub feature: Feature,
    pub polarity: Polarity,
}

impl WeakClassifier {
    pub fn new(feature: Feature, polarity: Polarity) -> Self {
        WeakClassifier { feature, polarity }
    }

    pub fn predict_view(&self, view: &WindowView<'_>) -> Result<Label, FeatureError> {
        Ok(self.polarity.label_for(eval_feature(&self.feature, view)?))
    }

    pub fn predict(&self, sample: &LabeledSample) -> Label {
        weak_predict(self, sample)
    }
}

pub fn weak_predict(h: &WeakClassifier, sample: &LabeledSample) -> Label {
    // Canonical geometry is validated at construction and the view has scale 1.
    h.predict_view(&sample.view())
        .expect("validated features always fit a canonical window")
}

pub fn weighted_error(
    h: &WeakClassifier,
    d: &WeightDistribution,
    samples: &[LabeledSample],
) -> Result<f64, BoostError> {
    if d.len() != samples.len() {
        return Err(BoostError::LengthMismatch {
            weights: d.len(),
            samples: samples.len(),
        });
    }
    Ok(samples
        .iter()
        .zip(d.weights())
        .filter(|(s, _)| weak_predict(h, s) != s.label())
        .map(|(_, w)| *w)
        .sum())
}

/// `eps / (1 - eps)` for `eps` in the open interval (0, 1/2).
pub fn beta(epsilon: f64) -> Result<f64, BoostError> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(BoostError::EpsilonOutOfRange(epsilon));
    }
    Ok(epsilon / (1.0 - epsilon))
}

/// Vote weight `ln(1 / beta)`.
pub fn alpha(beta: f64) -> Result<f64, BoostError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(BoostError::BetaOutOfRange(beta));
    }
    Ok((1.0 / beta).ln())
}

/// Scales correct samples by `beta` (misclassified ones by 1, or by 0 when
/// `literal_zero` is set) and renormalizes.
pub fn update_weights(
    d: &WeightDistribution,
    correct: &[bool],
    beta: f64,
    literal_zero: bool,
) -> Result<WeightDistribution, BoostError> {
    if d.len() != correct.len() {
        return Err(BoostError::LengthMismatch {
            weights: d.len(),
            samples: correct.len(),
        });
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(BoostError::BetaOutOfRange(beta));
    }
    let wrong_factor = if literal_zero { 0.0 } else { 1.0 };
    let scaled = d
        .weights()
        .iter()
        .zip(correct)
        .map(|(w, &ok)| w * if ok { beta } else { wrong_factor })
        .collect();
    WeightDistribution::from_weights(scaled)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub alpha: f64,
    pub weak: WeakClassifier,
}

/// Weighted vote over weak classifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongClassifier {
    stages: Vec<Stage>,
    window_w: usize,
    window_h: usize,
}

impl StrongClassifier {
    pub fn new(stages: Vec<Stage>) -> Result<Self, BoostError> {
        if let Some(s) = stages.iter().find(|s| !(s.alpha.is_finite() && s.alpha > 0.0)) {
            return Err(BoostError::BadAlpha(s.alpha));
        }
        Ok(StrongClassifier {
            stages,
            window_w: CANONICAL_W,
            window_h: CANONICAL_H,
        })
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn window_size(&self) -> (usize, usize) {
        (self.window_w, self.window_h)
    }

    /// Sum of all vote weights; the margin lies in `[-total, total]`.
    pub fn total_alpha(&self) -> f64 {
        self.stages.iter().map(|s| s.alpha).sum()
    }

    pub fn score_view(&self, view: &WindowView<'_>) -> Result<f64, FeatureError> {
        let mut margin = 0.0;
        for s in &self.stages {
            margin += s.alpha * s.weak.predict_view(view)?.sign();
        }
        Ok(margin)
    }

    pub fn score(&self, sample: &LabeledSample) -> f64 {
        score(self, sample)
    }

    pub fn classify(&self, sample: &LabeledSample, bias: f64) -> Label {
        classify(self, sample, bias)
    }
}

pub fn score(h: &StrongClassifier, sample: &LabeledSample) -> f64 {
    h.stages
        .iter()
        .map(|s| s.alpha * weak_predict(&s.weak, sample).sign())
        .sum()
}

/// Positive iff the margin strictly exceeds `bias`.
pub fn classify(h: &StrongClassifier, sample: &LabeledSample, bias: f64) -> Label {
    label_for_margin(score(h, sample), bias)
}

#[inline]
pub fn label_for_margin(margin: f64, bias: f64) -> Label {
    if margin > bias {
        Label::Pos
    } else {
        Label::Neg
    }
}

/// Source of weak classifiers for each boosting round.
pub trait WeakLearner {
    /// Returns a weak classifier for `round` (1-based) under distribution `d`.
    fn propose(
        &mut self,
        round: usize,
        d: &WeightDistribution,
        samples: &[LabeledSample],
    ) -> Result<WeakClassifier, BoostError>;
}

impl<F> WeakLearner for F
where
    F: FnMut(usize, &WeightDistribution, &[LabeledSample]) -> Result<WeakClassifier, BoostError>,
{
    fn propose(
        &mut self,
        round: usize,
        d: &WeightDistribution,
        samples: &[LabeledSample],
    ) -> Result<WeakClassifier, BoostError> {
        self(round, d, samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    pub epsilon_min: f64,
    pub literal_zero_update: bool,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            epsilon_min: EPSILON_MIN,
            literal_zero_update: false,
        }
    }
}

/// One kept boosting round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub round: usize,
    /// Raw weighted error, before clamping.
    pub epsilon: f64,
    pub beta: f64,
    pub alpha: f64,
    /// Running product of `2 sqrt(eps (1 - eps))` over clamped errors.
    pub bound: f64,
    /// Training error of the strong classifier after this round.
    pub train_error: f64,
    /// Distribution after this round's update.
    pub weights: WeightDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// All requested rounds ran.
    Completed,
    /// A weak classifier with zero error was found and kept.
    Perfect { round: usize },
    /// The learner returned a classifier with error >= 1/2; it was dropped.
    NoBetterThanChance { round: usize, epsilon: f64 },
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: StrongClassifier,
    pub log: Vec<RoundLog>,
    pub stop: StopReason,
}

pub fn train<L: WeakLearner + ?Sized>(
    samples: &[LabeledSample],
    rounds: usize,
    learner: &mut L,
    config: &BoostConfig,
) -> Result<TrainOutcome, BoostError> {
    if rounds == 0 {
        return Err(BoostError::NoRounds);
    }
    for class in [Label::Pos, Label::Neg] {
        if !samples.iter().any(|s| s.label() == class) {
            return Err(BoostError::EmptyClass(class));
        }
    }
    let n = samples.len();
    let mut d = WeightDistribution::uniform(n);
    let mut margins = vec![0.0f64; n];
    let mut stages = Vec::new();
    let mut log = Vec::new();
    let mut bound = 1.0;
    let mut stop = StopReason::Completed;

    for round in 1..=rounds {
        let weak = learner.propose(round, &d, samples)?;
        let predictions: Vec<Label> = samples.iter().map(|s| weak_predict(&weak, s)).collect();
        let correct: Vec<bool> = predictions
            .iter()
            .zip(samples)
            .map(|(p, s)| *p == s.label())
            .collect();
        let epsilon: f64 = correct
            .iter()
            .zip(d.weights())
            .filter(|(ok, _)| !**ok)
            .map(|(_, w)| *w)
            .sum();
        if epsilon >= 0.5 {
            stop = StopReason::NoBetterThanChance { round, epsilon };
            break;
        }
        let clamped = epsilon.clamp(config.epsilon_min, 1.0 - config.epsilon_min);
        let b = beta(clamped)?;
        let a = alpha(b)?;
        d = update_weights(&d, &correct, b, config.literal_zero_update)?;
        bound *= 2.0 * (clamped * (1.0 - clamped)).sqrt();
        for (m, p) in margins.iter_mut().zip(&predictions) {
            *m += a * p.sign();
        }
        let errors = margins
            .iter()
            .zip(samples)
            .filter(|(m, s)| label_for_margin(**m, 0.0) != s.label())
            .count();
        stages.push(Stage { alpha: a, weak });
        log.push(RoundLog {
            round,
            epsilon,
            beta: b,
            alpha: a,
            bound,
            train_error: errors as f64 / n as f64,
            weights: d.clone(),
        });
        if epsilon == 0.0 {
            stop = StopReason::Perfect { round };
            break;
        }
    }

    if stages.is_empty() {
        let eps = match stop {
            StopReason::NoBetterThanChance { epsilon, .. } => epsilon,
            _ => 0.5,
        };
        return Err(BoostError::NoUsefulWeakClassifier(eps));
    }
    Ok(TrainOutcome {
        model: StrongClassifier::new(stages)?,
        log,
        stop,
    })
}

/// Writes `t,epsilon,beta,alpha,bound,train_error` rows.
pub fn write_round_log<W: Write>(log: &[RoundLog], mut out: W) -> io::Result<()> {
    writeln!(out, "t,epsilon,beta,alpha,bound,train_error")?;
    for r in log {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.round, r.epsilon, r.beta, r.alpha, r.bound, r.train_error
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{ControlPointsFeature, HaarFeature, Point};
    use crate::imaging::Rect;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Samples whose pixel (0,0) is 200 for positives and 20 for negatives,
    /// with pixel (1,0) fixed at 100.
    fn marked_samples(n_pos: usize, n_neg: usize) -> Vec<LabeledSample> {
        let mut out = Vec::new();
        for (count, label, mark) in [(n_pos, Label::Pos, 200u8), (n_neg, Label::Neg, 90u8)] {
            for i in 0..count {
                let img = GrayImage::from_fn(CANONICAL_W, CANONICAL_H, |x, y| match (x, y) {
                    (0, 0) => mark,
                    (1, 0) => 100,
                    _ => ((x * 7 + y * 3 + i) % 200) as u8,
                })
                .unwrap();
                out.push(LabeledSample::new(img, label).unwrap());
            }
        }
        out
    }

    fn separating_feature() -> Feature {
        ControlPointsFeature::new(vec![Point::new(0, 0)], vec![Point::new(1, 0)], 50)
            .unwrap()
            .into()
    }

    fn never_fires() -> Feature {
        HaarFeature::new(Rect::new(0, 0, 1, 1), Rect::new(0, 0, 1, 1), 0.0)
            .unwrap()
            .into()
    }

    #[test]
    fn weak_predict_follows_polarity() {
        let s = &marked_samples(1, 0)[0];
        let pos = WeakClassifier::new(separating_feature(), Polarity::Positive);
        let neg = WeakClassifier::new(separating_feature(), Polarity::Negative);
        assert_eq!(weak_predict(&pos, s), Label::Pos);
        assert_eq!(weak_predict(&neg, s), Label::Neg);
        for s in marked_samples(20, 20) {
            assert_eq!(weak_predict(&neg, &s), weak_predict(&pos, &s).flipped());
        }
    }

    #[test]
    fn weighted_error_cases() {
        let samples = marked_samples(2, 2);
        let d = WeightDistribution::uniform(4);
        let good = WeakClassifier::new(separating_feature(), Polarity::Positive);
        let bad = WeakClassifier::new(separating_feature(), Polarity::Negative);
        assert_eq!(weighted_error(&good, &d, &samples).unwrap(), 0.0);
        assert_eq!(weighted_error(&bad, &d, &samples).unwrap(), 1.0);
        // never fires + positive polarity: every sample predicted negative
        let constant = WeakClassifier::new(never_fires(), Polarity::Positive);
        let one_pos = marked_samples(1, 3);
        assert_eq!(weighted_error(&constant, &d, &one_pos).unwrap(), 0.25);
        assert!(matches!(
            weighted_error(&good, &WeightDistribution::uniform(3), &samples),
            Err(BoostError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn beta_and_alpha_values() {
        assert!((beta(0.25).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let b = beta(0.4999).unwrap();
        assert!((b - 0.4999 / 0.5001).abs() < 1e-15 && b < 1.0 && b > 0.9996);
        let b = beta(1e-6).unwrap();
        assert!((b - 1.000001e-6).abs() < 1e-15);
        assert!(beta(0.5).is_err());
        assert!(beta(0.0).is_err());

        assert!((alpha(1.0 / 3.0).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!(alpha(1.0 - 1e-12).unwrap() < 1e-11);
        assert!(alpha(1.0).is_err());
        assert!(alpha(0.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let e: f64 = rng.gen_range(1e-6..0.5);
            let direct = ((1.0 - e) / e).ln();
            assert!((alpha(beta(e).unwrap()).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn update_weights_worked_example() {
        let d = WeightDistribution::uniform(4);
        let out = update_weights(&d, &[true, true, true, false], 1.0 / 3.0, false).unwrap();
        let expected = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5];
        for (w, e) in out.weights().iter().zip(expected) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn update_weights_all_correct_is_identity() {
        let d = WeightDistribution::from_weights(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let out = update_weights(&d, &[true; 4], 0.3, false).unwrap();
        for (a, b) in out.weights().iter().zip(d.weights()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn update_weights_literal_zero_drops_mistakes() {
        let d = WeightDistribution::uniform(4);
        let out = update_weights(&d, &[true, true, true, false], 0.5, true).unwrap();
        assert_eq!(out.weights()[3], 0.0);
        assert!((out.total() - 1.0).abs() < 1e-15);
        assert!(update_weights(&d, &[false; 4], 0.5, true).is_err());
    }

    #[test]
    fn update_gives_half_error_to_previous_classifier() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let n = rng.gen_range(2..50);
            let d = WeightDistribution::from_weights((0..n).map(|_| rng.gen_range(0.01..1.0)).collect())
                .unwrap();
            let correct: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.7)).collect();
            let eps: f64 = d.weights().iter().zip(&correct).filter(|(_, c)| !**c).map(|(w, _)| w).sum();
            if !(eps > 0.0 && eps < 0.5) {
                continue;
            }
            let next = update_weights(&d, &correct, beta(eps).unwrap(), false).unwrap();
            let next_eps: f64 = next.weights().iter().zip(&correct).filter(|(_, c)| !**c).map(|(w, _)| w).sum();
            assert!((next_eps - 0.5).abs() < 1e-12);
            assert!((next.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn score_and_classify() {
        let s = &marked_samples(1, 0)[0];
        let yes = WeakClassifier::new(separating_feature(), Polarity::Positive);
        let no = WeakClassifier::new(separating_feature(), Polarity::Negative);
        let one = StrongClassifier::new(vec![Stage { alpha: 2.0, weak: yes.clone() }]).unwrap();
        assert_eq!(score(&one, s), 2.0);
        assert_eq!(classify(&one, s, 0.0), Label::Pos);
        let tied = StrongClassifier::new(vec![
            Stage { alpha: 1.5, weak: yes },
            Stage { alpha: 1.5, weak: no },
        ])
        .unwrap();
        assert_eq!(score(&tied, s), 0.0);
        assert_eq!(classify(&tied, s, 0.0), Label::Neg);
        assert_eq!(classify(&one, s, 2.0), Label::Neg);
        assert_eq!(classify(&one, s, 1.999), Label::Pos);
    }

    #[test]
    fn strong_classifier_rejects_bad_alpha() {
        let weak = WeakClassifier::new(never_fires(), Polarity::Positive);
        assert!(StrongClassifier::new(vec![Stage { alpha: 0.0, weak: weak.clone() }]).is_err());
        assert!(StrongClassifier::new(vec![Stage { alpha: f64::NAN, weak }]).is_err());
    }

    #[test]
    fn train_separable_stops_after_one_round() {
        let samples = marked_samples(10, 15);
        let mut learner = |_: usize, _: &WeightDistribution, _: &[LabeledSample]| {
            Ok(WeakClassifier::new(separating_feature(), Polarity::Positive))
        };
        let out = train(&samples, 20, &mut learner, &BoostConfig::default()).unwrap();
        assert_eq!(out.model.len(), 1);
        assert_eq!(out.stop, StopReason::Perfect { round: 1 });
        assert_eq!(out.log[0].train_error, 0.0);
        assert!((out.log[0].alpha - ((1.0 - 1e-6) / 1e-6f64).ln()).abs() < 1e-9);
        for s in &samples {
            assert_eq!(out.model.classify(s, 0.0), s.label());
        }
    }

    #[test]
    fn train_coin_flip_reports_error() {
        let samples = marked_samples(5, 5);
        // never fires with positive polarity: all negative, error exactly 0.5
        let mut learner = |_: usize, _: &WeightDistribution, _: &[LabeledSample]| {
            Ok(WeakClassifier::new(never_fires(), Polarity::Positive))
        };
        let err = train(&samples, 5, &mut learner, &BoostConfig::default()).unwrap_err();
        assert!(matches!(err, BoostError::NoUsefulWeakClassifier(e) if e == 0.5));
    }

    #[test]
    fn train_validates_inputs() {
        let mut learner = |_: usize, _: &WeightDistribution, _: &[LabeledSample]| {
            Ok(WeakClassifier::new(separating_feature(), Polarity::Positive))
        };
        let only_pos = marked_samples(3, 0);
        assert!(matches!(
            train(&only_pos, 3, &mut learner, &BoostConfig::default()),
            Err(BoostError::EmptyClass(Label::Neg))
        ));
        let both = marked_samples(3, 3);
        assert!(matches!(
            train(&both, 0, &mut learner, &BoostConfig::default()),
            Err(BoostError::NoRounds)
        ));
        let mut failing = |_: usize, _: &WeightDistribution, _: &[LabeledSample]| {
            Err(BoostError::Learner("boom".into()))
        };
        assert!(matches!(
            train(&both, 3, &mut failing, &BoostConfig::default()),
            Err(BoostError::Learner(_))
        ));
    }

    #[test]
    fn sample_must_be_canonical() {
        let img = GrayImage::filled(10, 10, 0).unwrap();
        assert!(matches!(
            LabeledSample::new(img, Label::Pos),
            Err(BoostError::NotCanonical { width: 10, height: 10 })
        ));
    }

    #[test]
    fn round_log_csv_header() {
        let mut buf = Vec::new();
        write_round_log(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,epsilon,beta,alpha,bound,train_error\n");
    }
}
