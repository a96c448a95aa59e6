//! Save a trained model as text and load it back.

use boostdet::app::model_file::{format_model, parse_model};
use boostdet::app::synth::training_set;
use boostdet::{train, BoostConfig, FeatureKind, GeneticLearner, LearnerConfig};

fn main() {
    let samples = training_set(3, 50, 100);
    let mut learner = GeneticLearner::new(LearnerConfig::new(FeatureKind::SymmetricHaar, 3)).unwrap();
    let model = train(&samples, 5, &mut learner, &BoostConfig::default()).unwrap().model;
    let text = format_model(&model);
    print!("{text}");
    let loaded = parse_model(&text).unwrap();
    let same = samples.iter().all(|s| loaded.score(s) == model.score(s));
    println!("reloaded model agrees on all {} samples: {same}", samples.len());
}
