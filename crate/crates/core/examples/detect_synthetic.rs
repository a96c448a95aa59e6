//! Train a detector, then scan a synthetic frame and print detections against ground truth.

use boostdet::app::commands::detect_frame;
use boostdet::app::synth::{frame_sequence, training_set, FrameLayout};
use boostdet::{train, BoostConfig, FeatureKind, GeneticLearner, LearnerConfig, ScanConfig};

fn main() {
    let samples = training_set(5, 100, 200);
    let mut learner = GeneticLearner::new(LearnerConfig::new(FeatureKind::Haar, 5)).unwrap();
    let model = train(&samples, 30, &mut learner, &BoostConfig::default()).unwrap().model;

    let frame = &frame_sequence(6, 1, &FrameLayout::default())[0];
    let scan = ScanConfig { bias: 2.0, ..ScanConfig::default() };
    let dets = detect_frame(&model, &frame.image, &scan, 0.3).unwrap();
    for b in &frame.truth.boxes {
        println!("target {b}");
    }
    for d in &dets {
        let best = frame.truth.boxes.iter().map(|b| b.iou(&d.rect)).fold(0.0, f64::max);
        println!("detection {} margin {:.3} best IoU {:.2}", d.rect, d.margin, best);
    }
}
