//! The four feature families evaluated on one synthetic vehicle crop.

use boostdet::app::synth::positive_crop;
use boostdet::features::{
    ChainPoint, ControlPointsFeature, HaarFeature, NConnexityFeature, Point, PointClass, SymmetricHaarFeature,
    SymmetricThresholds, WindowView,
};
use boostdet::{build_integral, Feature, Rect};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let crop = positive_crop(&mut ChaCha8Rng::seed_from_u64(7));
    let ii = build_integral(&crop);
    let view = WindowView::full(&ii, &crop).unwrap();

    // body (rows 6..14) against underside bar (rows 17..20)
    let haar = HaarFeature::new(Rect::new(4, 6, 24, 8), Rect::new(4, 17, 24, 3), 1.0).unwrap();
    let cp = ControlPointsFeature::new(
        vec![Point::new(6, 10), Point::new(25, 10)],
        vec![Point::new(16, 18)],
        40,
    )
    .unwrap();
    let sym = SymmetricHaarFeature::new(
        Rect::new(3, 6, 6, 6),
        Rect::new(3, 17, 6, 3),
        Rect::new(12, 12, 8, 3),
        Rect::new(12, 17, 8, 3),
        SymmetricThresholds { t1: 0.5, t2: 0.5, t3: 0.5, t_diff1: 1.0, t_diff2: 0.0 },
    )
    .unwrap();
    let chain = NConnexityFeature::new(
        (13..18)
            .map(|y| ChainPoint { point: Point::new(16, y), class: if y < 15 { PointClass::Pos } else { PointClass::Neg } })
            .collect(),
        30,
    )
    .unwrap();

    let features: [Feature; 4] = [haar.into(), cp.into(), sym.into(), chain.into()];
    for f in &features {
        println!("{:8} fires: {}", f.kind().name(), f.evaluate(&view).unwrap());
    }
}
