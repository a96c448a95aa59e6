//! AdaBoost with the genetic weak learner: per-round error, vote weight and bound.

use boostdet::app::synth::training_set;
use boostdet::{train, BoostConfig, FeatureKind, GeneticLearner, LearnerConfig};

fn main() {
    let family = std::env::args()
        .nth(1)
        .and_then(|n| FeatureKind::from_name(&n))
        .unwrap_or(FeatureKind::NConnexity);
    let samples = training_set(1, 100, 200);
    let mut learner = GeneticLearner::new(LearnerConfig::new(family, 1)).unwrap();
    let out = train(&samples, 20, &mut learner, &BoostConfig::default()).unwrap();
    println!("round  epsilon   alpha   bound  train_error");
    for r in &out.log {
        println!("{:5}  {:.4}  {:6.3}  {:.4}  {:.4}", r.round, r.epsilon, r.alpha, r.bound, r.train_error);
    }
    println!("stop: {:?}", out.stop);
}
