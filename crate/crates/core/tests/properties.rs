mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use boostdet::app::annotations::parse_annotations;
use boostdet::app::commands::{assemble_frames, parse_detections};
use boostdet::evalkit::{match_frame, DEFAULT_IOU};
use boostdet::features::{eval_feature, mirror_rect, WindowView};
use boostdet::learner::random_feature;
use boostdet::{build_integral, FeatureKind, GrayImage, Rect, CANONICAL_H, CANONICAL_W};

fn eval_on(f: &boostdet::Feature, img: &GrayImage) -> bool {
    let ii = build_integral(img);
    eval_feature(f, &WindowView::full(&ii, img).unwrap()).unwrap()
}

fn window_in(lo: u8, hi: u8, seed: u64) -> GrayImage {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(CANONICAL_W, CANONICAL_H, |_, _| rng.gen_range(lo..=hi)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pixel_families_ignore_brightness_shift(seed in any::<u64>(), c in -50i32..=50) {
        let img = window_in(50, 205, seed);
        let shifted = GrayImage::from_fn(CANONICAL_W, CANONICAL_H, |x, y| (img.get(x, y) as i32 + c) as u8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for family in [FeatureKind::ControlPoints, FeatureKind::NConnexity] {
            let f = random_feature(family, &mut rng);
            prop_assert_eq!(eval_on(&f, &img), eval_on(&f, &shifted));
        }
    }

    #[test]
    fn haar_ignores_affine_maps(seed in any::<u64>(), a in 1u8..=2, b in 0u8..=40) {
        // raw values in [20, 100] keep a*p + b inside the byte range
        let img = window_in(20, 100, seed);
        let mapped = GrayImage::from_fn(CANONICAL_W, CANONICAL_H, |x, y| img.get(x, y) * a + b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        for family in [FeatureKind::Haar, FeatureKind::SymmetricHaar] {
            let f = random_feature(family, &mut rng);
            prop_assert_eq!(eval_on(&f, &img), eval_on(&f, &mapped));
        }
    }

    #[test]
    fn dispatch_matches_pixel_loops(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = common::structured_image(70, 50, &mut rng);
        let ii = build_integral(&img);
        for family in FeatureKind::ALL {
            let win = common::random_window(70, 50, &mut rng);
            let f = random_feature(family, &mut rng);
            let fast = eval_feature(&f, &WindowView::new(&ii, &img, win).unwrap()).unwrap();
            prop_assert_eq!(fast, common::feature(&f, &img, &win));
        }
    }

    #[test]
    fn mirror_is_an_involution(x in 0usize..32, w in 1usize..=32, y in 0usize..24, h in 1usize..=24) {
        prop_assume!(x + w <= 32);
        let r = Rect::new(x, y, w, h);
        prop_assert_eq!(mirror_rect(&mirror_rect(&r, 32), 32), r);
        prop_assert_eq!(mirror_rect(&r, 32), common::mirror(&r));
    }

    #[test]
    fn matching_is_one_to_one_and_scale_free(
        truths in prop::collection::vec((0usize..60, 0usize..60, 4usize..30, 4usize..30), 0..5),
        dets in prop::collection::vec((0usize..60, 0usize..60, 4usize..30, 4usize..30, -5.0f64..5.0), 0..8),
    ) {
        let frame = |k: usize| boostdet::GroundTruthFrame {
            frame_id: "f".into(),
            boxes: truths.iter().map(|&(x, y, w, h)| Rect::new(x * k, y * k, w * k, h * k)).collect(),
        };
        let ds = |k: usize| -> Vec<boostdet::Detection> {
            dets.iter()
                .map(|&(x, y, w, h, m)| boostdet::Detection { rect: Rect::new(x * k, y * k, w * k, h * k), margin: m })
                .collect()
        };
        let r = match_frame(&ds(1), &frame(1), DEFAULT_IOU);
        prop_assert!(r.tp <= dets.len().min(truths.len()));
        prop_assert_eq!(r.tp + r.fn_, truths.len());
        prop_assert_eq!(r.tp + r.fp, dets.len());
        prop_assert_eq!(r, match_frame(&ds(2), &frame(2), DEFAULT_IOU));
    }
}

#[test]
fn chain_counts_match_fixture() {
    let (chains, triples) = common::chain_counts(5);
    let fixture = include_str!("fixtures/chain_counts.txt");
    assert!(fixture.contains(&format!("valid_chains {chains}\n")), "{chains}");
    assert!(fixture.contains(&format!("ordered_triples {triples}\n")), "{triples}");
    assert!(chains < triples);
}

#[test]
fn eval_fixture_per_frame_counts() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/eval10");
    let read = |name: &str| std::fs::read_to_string(format!("{root}/{name}")).unwrap();
    let frames = assemble_frames(
        parse_annotations(&read("annotations.txt")).unwrap(),
        parse_detections(&read("detections.csv")).unwrap(),
    );
    let expected: Vec<(String, usize, usize, usize)> = read("expected.txt")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    assert_eq!(frames.len(), expected.len());
    for (frame, (id, tp, fp, fn_)) in frames.iter().zip(&expected) {
        assert_eq!(&frame.truth.frame_id, id);
        let r = match_frame(&frame.detections, &frame.truth, DEFAULT_IOU);
        assert_eq!((r.tp, r.fp, r.fn_), (*tp, *fp, *fn_), "{id}");
    }
}
