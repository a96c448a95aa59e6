//! One weak-learner search, showing best and mean error per generation.

use boostdet::app::synth::training_set;
use boostdet::boosting::WeightDistribution;
use boostdet::learner::{search, LearnerConfig};
use boostdet::FeatureKind;

fn main() {
    let samples = training_set(2, 100, 200);
    let d = WeightDistribution::uniform(samples.len());
    for family in FeatureKind::ALL {
        let config = LearnerConfig { workers: 4, ..LearnerConfig::new(family, 2) };
        let report = search(&d, &samples, &config, &[]).unwrap();
        let trace: Vec<String> = report.history.iter().map(|g| format!("{:.3}", g.best_epsilon)).collect();
        println!("{family:8} {} -> {:.3}  [{}]", report.initial_best_epsilon, report.best.epsilon, trace.join(" "));
    }
}
