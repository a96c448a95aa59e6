//! Evolutionary weak learner.
//!
//! A (mu + lambda) search over one feature family: the best quarter of the
//! population survives each generation, a tenth is replaced by fresh random
//! features and the rest are elites with one to three mutations applied.
//! Each candidate is scored with the better of its two polarities, so the
//! returned weighted error never exceeds 1/2.
//!
//! Every population slot draws from its own ChaCha stream keyed by
//! `(seed, generation, slot)`, and scoring preserves slot order, so results
//! do not depend on the number of worker threads.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rayon::ThreadPool;
use thiserror::Error;

use crate::boosting::{
    BoostError, Label, LabeledSample, Polarity, WeakClassifier, WeakLearner, WeightDistribution,
};
use crate::features::{
    eval_feature, is_centered, ChainPoint, ControlPointsFeature, Feature, FeatureError, FeatureKind,
    HaarFeature, NConnexityFeature, Point, PointClass, SymmetricHaarFeature, SymmetricThresholds,
    CANONICAL_H, CANONICAL_W, MAX_CHAIN_LEN, MAX_CLASS_POINTS, MIN_CHAIN_LEN,
};
use crate::imaging::Rect;

pub const HAAR_THRESHOLD_MAX: f64 = 8.0;
pub const SEPARATION_MAX: u8 = 128;
pub const SYMMETRY_TOLERANCE_MAX: f64 = 4.0;
pub const DOMINANCE_MARGIN_MAX: f64 = 4.0;
/// Initial thresholds are drawn below this; mutation may raise them to the caps above.
/// Normalized mean differences rarely exceed it, so higher draws almost never fire.
pub const INITIAL_THRESHOLD_MAX: f64 = 2.0;

const MAX_RETRIES: usize = 64;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("invalid learner configuration: {0}")]
    Config(String),
    #[error("{weights} weights for {samples} samples")]
    LengthMismatch { weights: usize, samples: usize },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

impl From<LearnerError> for BoostError {
    fn from(e: LearnerError) -> Self {
        BoostError::Learner(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub family: FeatureKind,
    pub population_size: usize,
    pub generations: usize,
    /// Generations without improvement before the search stops.
    pub stall_limit: usize,
    pub min_mutations: usize,
    pub max_mutations: usize,
    pub seed: u64,
    /// Evaluation threads; never changes the result.
    pub workers: usize,
}

impl LearnerConfig {
    pub fn new(family: FeatureKind, seed: u64) -> Self {
        LearnerConfig {
            family,
            population_size: 100,
            generations: 30,
            stall_limit: 8,
            min_mutations: 1,
            max_mutations: 3,
            seed,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        if self.population_size < 2 {
            return Err(LearnerError::Config("population size must be at least 2".into()));
        }
        if self.generations < 1 {
            return Err(LearnerError::Config("generations must be at least 1".into()));
        }
        if self.min_mutations < 1 || self.min_mutations > self.max_mutations {
            return Err(LearnerError::Config("mutation count range must be 1 <= min <= max".into()));
        }
        if self.workers < 1 {
            return Err(LearnerError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    fn elite_count(&self) -> usize {
        self.population_size.div_ceil(4).max(1)
    }

    fn fresh_count(&self) -> usize {
        let fresh = (self.population_size as f64 * 0.1).round() as usize;
        fresh.min(self.population_size - self.elite_count())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub weak: WeakClassifier,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStat {
    pub generation: usize,
    pub best_epsilon: f64,
    pub mean_epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub best: Candidate,
    /// Best error in the initial population.
    pub initial_best_epsilon: f64,
    pub history: Vec<GenerationStat>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed from a parent seed and a key.
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    splitmix64(seed ^ splitmix64(key))
}

fn slot_rng(seed: u64, generation: usize, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, generation as u64));
    rng.set_stream(slot as u64);
    rng
}

fn random_rect<R: Rng + ?Sized>(rng: &mut R, max_w: usize, max_h: usize) -> Rect {
    let w = rng.gen_range(1..=max_w);
    let h = rng.gen_range(1..=max_h);
    Rect::new(rng.gen_range(0..=max_w - w), rng.gen_range(0..=max_h - h), w, h)
}

fn random_centered_rect<R: Rng + ?Sized>(rng: &mut R) -> Rect {
    let w = rng.gen_range(1..=CANONICAL_W);
    let h = rng.gen_range(1..=CANONICAL_H);
    let xs: Vec<usize> = (0..=CANONICAL_W - w)
        .filter(|&x| is_centered(&Rect::new(x, 0, w, h), CANONICAL_W))
        .collect();
    let x = *xs.choose(rng).expect("every width has a centred position");
    Rect::new(x, rng.gen_range(0..=CANONICAL_H - h), w, h)
}

fn random_point<R: Rng + ?Sized>(rng: &mut R) -> Point {
    Point::new(rng.gen_range(0..CANONICAL_W), rng.gen_range(0..CANONICAL_H))
}

fn random_points<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(n);
    while out.len() < n {
        let p = random_point(rng);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn random_class<R: Rng + ?Sized>(rng: &mut R) -> PointClass {
    if rng.gen_bool(0.5) {
        PointClass::Pos
    } else {
        PointClass::Neg
    }
}

fn random_separation<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    rng.gen_range(1..=SEPARATION_MAX)
}

/// In-window 8-neighbours of `p` not contained in `taken`.
fn free_neighbours(p: Point, taken: &[ChainPoint]) -> Vec<Point> {
    let mut out = Vec::with_capacity(8);
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let (x, y) = (p.x as i64 + dx, p.y as i64 + dy);
            if x < 0 || y < 0 || x >= CANONICAL_W as i64 || y >= CANONICAL_H as i64 {
                continue;
            }
            let q = Point::new(x as usize, y as usize);
            if !taken.iter().any(|c| c.point == q) {
                out.push(q);
            }
        }
    }
    out
}

fn random_chain<R: Rng + ?Sized>(rng: &mut R) -> Vec<ChainPoint> {
    let len = rng.gen_range(MIN_CHAIN_LEN..=MAX_CHAIN_LEN);
    loop {
        let mut chain = vec![ChainPoint { point: random_point(rng), class: random_class(rng) }];
        while chain.len() < len {
            let last = chain[chain.len() - 1].point;
            match free_neighbours(last, &chain).choose(rng) {
                Some(&p) => chain.push(ChainPoint { point: p, class: random_class(rng) }),
                None => break,
            }
        }
        if chain.len() < len {
            continue;
        }
        if chain.iter().all(|c| c.class == chain[0].class) {
            let i = rng.gen_range(0..chain.len());
            chain[i].class = chain[i].class.flipped();
        }
        return chain;
    }
}

/// Draws a random feature of `family` satisfying all of its invariants.
pub fn random_feature<R: Rng + ?Sized>(family: FeatureKind, rng: &mut R) -> Feature {
    for _ in 0..MAX_RETRIES {
        let candidate: Result<Feature, FeatureError> = match family {
            FeatureKind::Haar => HaarFeature::new(
                random_rect(rng, CANONICAL_W, CANONICAL_H),
                random_rect(rng, CANONICAL_W, CANONICAL_H),
                rng.gen_range(0.0..=INITIAL_THRESHOLD_MAX),
            )
            .map(Feature::from),
            FeatureKind::ControlPoints => {
                let n_pos = rng.gen_range(1..=MAX_CLASS_POINTS);
                let n_neg = rng.gen_range(1..=MAX_CLASS_POINTS);
                let pos = random_points(rng, n_pos);
                let neg = random_points(rng, n_neg);
                ControlPointsFeature::new(pos, neg, random_separation(rng)).map(Feature::from)
            }
            FeatureKind::SymmetricHaar => {
                let half = CANONICAL_W / 2;
                let z1a = random_rect(rng, half, CANONICAL_H);
                let z1b = random_rect(rng, half, CANONICAL_H);
                let z3a = random_centered_rect(rng);
                let z3b = random_centered_rect(rng);
                let thresholds = SymmetricThresholds {
                    t1: rng.gen_range(0.0..=INITIAL_THRESHOLD_MAX),
                    t2: rng.gen_range(0.0..=INITIAL_THRESHOLD_MAX),
                    t3: rng.gen_range(0.0..=INITIAL_THRESHOLD_MAX),
                    // (0, max]
                    t_diff1: INITIAL_THRESHOLD_MAX - rng.gen_range(0.0..INITIAL_THRESHOLD_MAX),
                    t_diff2: rng.gen_range(0.0..=INITIAL_THRESHOLD_MAX / 2.0),
                };
                SymmetricHaarFeature::new(z1a, z1b, z3a, z3b, thresholds).map(Feature::from)
            }
            FeatureKind::NConnexity => {
                NConnexityFeature::new(random_chain(rng), random_separation(rng)).map(Feature::from)
            }
        };
        if let Ok(f) = candidate {
            return f;
        }
    }
    unreachable!("random {family} generation keeps failing validation")
}

fn jitter_threshold<R: Rng + ?Sized>(rng: &mut R, t: f64, max: f64) -> f64 {
    let moved = if t == 0.0 {
        rng.gen_range(0.0..0.1)
    } else {
        t * rng.gen_range(0.9..=1.1)
    };
    moved.clamp(0.0, max)
}

fn jitter_separation<R: Rng + ?Sized>(rng: &mut R, v: u8) -> u8 {
    let step = rng.gen_range(1..=8i32) * if rng.gen_bool(0.5) { 1 } else { -1 };
    (v as i32 + step).clamp(1, 255) as u8
}

fn step<R: Rng + ?Sized>(rng: &mut R, value: usize) -> Option<usize> {
    if rng.gen_bool(0.5) {
        Some(value + 1)
    } else {
        value.checked_sub(1)
    }
}

/// Translates or resizes a rect by one pixel. Bounds are checked by the
/// feature constructor.
fn nudge_rect<R: Rng + ?Sized>(rng: &mut R, r: Rect) -> Option<Rect> {
    let mut out = r;
    match rng.gen_range(0..4) {
        0 => out.x = step(rng, r.x)?,
        1 => out.y = step(rng, r.y)?,
        2 => out.w = step(rng, r.w)?,
        _ => out.h = step(rng, r.h)?,
    }
    Some(out)
}

fn nudge_point<R: Rng + ?Sized>(rng: &mut R, p: Point) -> Option<Point> {
    let dirs = [(-1i64, -1i64), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
    let (dx, dy) = dirs[rng.gen_range(0..dirs.len())];
    let (x, y) = (p.x as i64 + dx, p.y as i64 + dy);
    if x < 0 || y < 0 {
        return None;
    }
    Some(Point::new(x as usize, y as usize))
}

fn propose_haar<R: Rng + ?Sized>(rng: &mut R, f: &HaarFeature) -> Option<Feature> {
    let (mut a, mut b, mut t) = (f.rect_a(), f.rect_b(), f.threshold());
    match rng.gen_range(0..3) {
        0 => a = nudge_rect(rng, a)?,
        1 => b = nudge_rect(rng, b)?,
        _ => t = jitter_threshold(rng, t, HAAR_THRESHOLD_MAX),
    }
    HaarFeature::new(a, b, t).ok().map(Feature::from)
}

fn propose_control_points<R: Rng + ?Sized>(rng: &mut R, f: &ControlPointsFeature) -> Option<Feature> {
    let (mut pos, mut neg, mut v) = (f.pos().to_vec(), f.neg().to_vec(), f.v());
    let class = if rng.gen_bool(0.5) { &mut pos } else { &mut neg };
    match rng.gen_range(0..4) {
        0 => {
            let i = rng.gen_range(0..class.len());
            class[i] = nudge_point(rng, class[i])?;
        }
        1 => {
            if class.len() >= MAX_CLASS_POINTS {
                return None;
            }
            class.push(random_point(rng));
        }
        2 => {
            if class.len() <= 1 {
                return None;
            }
            let i = rng.gen_range(0..class.len());
            class.remove(i);
        }
        _ => v = jitter_separation(rng, v),
    }
    ControlPointsFeature::new(pos, neg, v).ok().map(Feature::from)
}

fn propose_symmetric<R: Rng + ?Sized>(rng: &mut R, f: &SymmetricHaarFeature) -> Option<Feature> {
    let (mut z1a, mut z1b) = f.z1();
    let (mut z3a, mut z3b) = f.z3();
    let mut t = f.thresholds();
    match rng.gen_range(0..9) {
        0 => z1a = nudge_rect(rng, z1a)?,
        1 => z1b = nudge_rect(rng, z1b)?,
        2 => z3a = nudge_rect(rng, z3a)?,
        3 => z3b = nudge_rect(rng, z3b)?,
        4 => t.t1 = jitter_threshold(rng, t.t1, HAAR_THRESHOLD_MAX),
        5 => t.t2 = jitter_threshold(rng, t.t2, HAAR_THRESHOLD_MAX),
        6 => t.t3 = jitter_threshold(rng, t.t3, HAAR_THRESHOLD_MAX),
        7 => t.t_diff1 = jitter_threshold(rng, t.t_diff1, SYMMETRY_TOLERANCE_MAX),
        _ => t.t_diff2 = jitter_threshold(rng, t.t_diff2, DOMINANCE_MARGIN_MAX),
    }
    SymmetricHaarFeature::new(z1a, z1b, z3a, z3b, t).ok().map(Feature::from)
}

fn propose_nconnexity<R: Rng + ?Sized>(rng: &mut R, f: &NConnexityFeature) -> Option<Feature> {
    let mut chain = f.chain().to_vec();
    let mut v = f.v();
    let at_front = rng.gen_bool(0.5);
    match rng.gen_range(0..5) {
        0 => {
            // Re-anchor an endpoint next to its only chain neighbour.
            let (end, anchor) = if at_front { (0, 1) } else { (chain.len() - 1, chain.len() - 2) };
            let others: Vec<ChainPoint> = chain.iter().copied().filter(|c| c.point != chain[end].point).collect();
            let options = free_neighbours(chain[anchor].point, &others);
            let p = **options.iter().filter(|p| **p != chain[end].point).collect::<Vec<_>>().choose(rng)?;
            chain[end].point = p;
        }
        1 => {
            if chain.len() >= MAX_CHAIN_LEN {
                return None;
            }
            let end = if at_front { chain[0].point } else { chain[chain.len() - 1].point };
            let &p = free_neighbours(end, &chain).choose(rng)?;
            let new = ChainPoint { point: p, class: random_class(rng) };
            if at_front {
                chain.insert(0, new);
            } else {
                chain.push(new);
            }
        }
        2 => {
            if chain.len() <= MIN_CHAIN_LEN {
                return None;
            }
            if at_front {
                chain.remove(0);
            } else {
                chain.pop();
            }
        }
        3 => {
            let i = rng.gen_range(0..chain.len());
            chain[i].class = chain[i].class.flipped();
        }
        _ => v = jitter_separation(rng, v),
    }
    NConnexityFeature::new(chain, v).ok().map(Feature::from)
}

/// Applies one family-specific move. Invalid proposals are redrawn; after
/// repeated failures the input is returned unchanged.
pub fn mutate<R: Rng + ?Sized>(feature: &Feature, rng: &mut R) -> Feature {
    for _ in 0..MAX_RETRIES {
        let proposal = match feature {
            Feature::Haar(f) => propose_haar(rng, f),
            Feature::ControlPoints(f) => propose_control_points(rng, f),
            Feature::SymmetricHaar(f) => propose_symmetric(rng, f),
            Feature::NConnexity(f) => propose_nconnexity(rng, f),
        };
        if let Some(p) = proposal {
            if &p != feature {
                return p;
            }
        }
    }
    feature.clone()
}

/// Scores a feature under `d`, returning the better polarity and its error.
/// Ties go to the positive polarity.
pub fn evaluate_feature(
    feature: &Feature,
    d: &WeightDistribution,
    samples: &[LabeledSample],
) -> Result<(Polarity, f64), FeatureError> {
    let mut err_pos = 0.0;
    let mut err_neg = 0.0;
    for (s, w) in samples.iter().zip(d.weights()) {
        let fired = eval_feature(feature, &s.view())?;
        // Positive polarity predicts Pos when fired; it errs exactly when
        // `fired` disagrees with the label.
        if fired != (s.label() == Label::Pos) {
            err_pos += w;
        } else {
            err_neg += w;
        }
    }
    Ok(if err_neg < err_pos {
        (Polarity::Negative, err_neg)
    } else {
        (Polarity::Positive, err_pos)
    })
}

#[derive(Debug, Clone)]
struct Scored {
    feature: Feature,
    polarity: Polarity,
    epsilon: f64,
}

fn score_all(
    features: Vec<Feature>,
    d: &WeightDistribution,
    samples: &[LabeledSample],
    pool: Option<&ThreadPool>,
) -> Result<Vec<Scored>, LearnerError> {
    let score = |feature: Feature| -> Result<Scored, FeatureError> {
        let (polarity, epsilon) = evaluate_feature(&feature, d, samples)?;
        Ok(Scored { feature, polarity, epsilon })
    };
    let scored: Result<Vec<Scored>, FeatureError> = match pool {
        Some(pool) => pool.install(|| features.into_par_iter().map(score).collect()),
        None => features.into_iter().map(score).collect(),
    };
    Ok(scored?)
}

fn stat(generation: usize, population: &[Scored]) -> GenerationStat {
    let best = population.iter().map(|s| s.epsilon).fold(f64::INFINITY, f64::min);
    let mean = population.iter().map(|s| s.epsilon).sum::<f64>() / population.len() as f64;
    GenerationStat {
        generation,
        best_epsilon: best,
        mean_epsilon: mean,
    }
}

fn build_pool(workers: usize) -> Result<Option<ThreadPool>, LearnerError> {
    if workers <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map(Some)
        .map_err(|e| LearnerError::Pool(e.to_string()))
}

/// Runs the evolutionary search. `planted` features take the first slots of
/// the initial population.
pub fn search(
    d: &WeightDistribution,
    samples: &[LabeledSample],
    config: &LearnerConfig,
    planted: &[Feature],
) -> Result<SearchReport, LearnerError> {
    let pool = build_pool(config.workers)?;
    search_in(d, samples, config, planted, pool.as_ref())
}

fn search_in(
    d: &WeightDistribution,
    samples: &[LabeledSample],
    config: &LearnerConfig,
    planted: &[Feature],
    pool: Option<&ThreadPool>,
) -> Result<SearchReport, LearnerError> {
    config.validate()?;
    if d.len() != samples.len() {
        return Err(LearnerError::LengthMismatch {
            weights: d.len(),
            samples: samples.len(),
        });
    }
    if let Some(f) = planted.iter().find(|f| f.kind() != config.family) {
        return Err(LearnerError::Config(format!(
            "planted {} feature in a {} search",
            f.kind(),
            config.family
        )));
    }

    let size = config.population_size;
    let initial: Vec<Feature> = (0..size)
        .map(|slot| match planted.get(slot) {
            Some(f) => f.clone(),
            None => random_feature(config.family, &mut slot_rng(config.seed, 0, slot)),
        })
        .collect();
    let mut population = score_all(initial, d, samples, pool)?;
    // Stable: equal errors keep slot order.
    population.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));

    let first = stat(0, &population);
    let initial_best_epsilon = first.best_epsilon;
    let mut history = vec![first];
    let mut best = population[0].clone();
    let mut stalled = 0;

    let elites = config.elite_count();
    let fresh = config.fresh_count();
    for generation in 1..config.generations {
        if best.epsilon == 0.0 || stalled >= config.stall_limit {
            break;
        }
        population.truncate(elites);
        let offspring: Vec<Feature> = (elites..size)
            .map(|slot| {
                let mut rng = slot_rng(config.seed, generation, slot);
                if slot < elites + fresh {
                    random_feature(config.family, &mut rng)
                } else {
                    let parent = &population[rng.gen_range(0..elites)].feature;
                    let moves = rng.gen_range(config.min_mutations..=config.max_mutations);
                    (0..moves).fold(parent.clone(), |f, _| mutate(&f, &mut rng))
                }
            })
            .collect();
        population.extend(score_all(offspring, d, samples, pool)?);
        population.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        history.push(stat(generation, &population));

        if population[0].epsilon < best.epsilon {
            best = population[0].clone();
            stalled = 0;
        } else {
            stalled += 1;
        }
    }

    Ok(SearchReport {
        best: Candidate {
            weak: WeakClassifier::new(best.feature, best.polarity),
            epsilon: best.epsilon,
        },
        initial_best_epsilon,
        history,
    })
}

/// Best weak classifier found for `config.family` under `d`.
pub fn search_best(
    d: &WeightDistribution,
    samples: &[LabeledSample],
    config: &LearnerConfig,
) -> Result<Candidate, LearnerError> {
    Ok(search(d, samples, config, &[])?.best)
}

/// Progress of one boosting round's search.
#[derive(Debug, Clone)]
pub struct RoundProgress {
    pub round: usize,
    pub history: Vec<GenerationStat>,
}

/// Boosting adapter: runs [`search`] each round with a round-derived seed.
pub struct GeneticLearner {
    config: LearnerConfig,
    pool: Option<ThreadPool>,
    progress: Vec<RoundProgress>,
}

impl GeneticLearner {
    pub fn new(config: LearnerConfig) -> Result<Self, LearnerError> {
        config.validate()?;
        let pool = build_pool(config.workers)?;
        Ok(GeneticLearner {
            config,
            pool,
            progress: Vec::new(),
        })
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn progress(&self) -> &[RoundProgress] {
        &self.progress
    }
}

impl WeakLearner for GeneticLearner {
    fn propose(
        &mut self,
        round: usize,
        d: &WeightDistribution,
        samples: &[LabeledSample],
    ) -> Result<WeakClassifier, BoostError> {
        let config = LearnerConfig {
            seed: derive_seed(self.config.seed, round as u64),
            ..self.config.clone()
        };
        let report = search_in(d, samples, &config, &[], self.pool.as_ref())?;
        self.progress.push(RoundProgress {
            round,
            history: report.history,
        });
        Ok(report.best.weak)
    }
}

/// Writes `round,generation,best_epsilon,mean_epsilon` rows.
pub fn write_progress<W: Write>(progress: &[RoundProgress], mut out: W) -> io::Result<()> {
    writeln!(out, "round,generation,best_epsilon,mean_epsilon")?;
    for p in progress {
        for g in &p.history {
            writeln!(out, "{},{},{},{}", p.round, g.generation, g.best_epsilon, g.mean_epsilon)?;
        }
    }
    Ok(())
}
