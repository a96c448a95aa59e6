//! ROC and precision-recall curves from a hand-made detection set.

use boostdet::app::commands::evaluate;
use boostdet::evalkit::{write_pr, write_roc, DEFAULT_IOU};
use boostdet::{Detection, EvalFrame, GroundTruthFrame, Rect};

fn main() {
    let target = Rect::new(10, 10, 32, 24);
    let frames: Vec<EvalFrame> = (0..4)
        .map(|i| EvalFrame {
            truth: GroundTruthFrame { frame_id: format!("f{i}"), boxes: vec![target] },
            detections: vec![
                Detection { rect: Rect::new(10 + i, 10, 32, 24), margin: 3.0 - i as f64 },
                Detection { rect: Rect::new(60, 40, 32, 24), margin: 1.0 + 0.5 * i as f64 },
            ],
        })
        .collect();
    let s = evaluate(&frames, DEFAULT_IOU);
    println!("auc {:.4}, all kept: tp {} fp {} fn {}", s.auc, s.totals.tp, s.totals.fp, s.totals.fn_);
    write_roc(&s.roc, std::io::stdout()).unwrap();
    write_pr(&s.pr, std::io::stdout()).unwrap();
}
