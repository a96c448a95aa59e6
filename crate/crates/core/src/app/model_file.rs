//! Versioned text format for strong classifiers.
//!
//! ```text
//! boostdet-model 1
//! window 32 24
//! stages 2
//! stage alpha=1.0986122886681098 polarity=+ family=haar a=0,0,16,24 b=16,0,16,24 t=0.5
//! stage alpha=0.7 polarity=- family=nconnex chain=3:4:+;4:5:- v=40
//! ```
//!
//! Other families: `family=cp pos=x:y;... neg=x:y;... v=N` and
//! `family=symhaar z1a=.. z1b=.. z3a=.. z3b=.. t1=.. t2=.. t3=.. tdiff1=.. tdiff2=..`.
//! Reals use Rust's shortest round-trip formatting.

use std::collections::HashMap;

use crate::boosting::{Polarity, Stage, StrongClassifier, WeakClassifier};
use crate::features::{
    ChainPoint, ControlPointsFeature, Feature, FeatureKind, HaarFeature, NConnexityFeature, Point,
    PointClass, SymmetricHaarFeature, SymmetricThresholds, CANONICAL_H, CANONICAL_W,
};
use crate::imaging::Rect;

use super::LineError;

pub const FORMAT_MAGIC: &str = "boostdet-model";
pub const FORMAT_VERSION: u32 = 1;

fn rect_str(r: &Rect) -> String {
    format!("{},{},{},{}", r.x, r.y, r.w, r.h)
}

fn points_str(points: &[Point]) -> String {
    points
        .iter()
        .map(|p| format!("{}:{}", p.x, p.y))
        .collect::<Vec<_>>()
        .join(";")
}

fn chain_str(chain: &[ChainPoint]) -> String {
    chain
        .iter()
        .map(|c| {
            let tag = match c.class {
                PointClass::Pos => '+',
                PointClass::Neg => '-',
            };
            format!("{}:{}:{}", c.point.x, c.point.y, tag)
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn feature_fields(f: &Feature) -> String {
    match f {
        Feature::Haar(h) => format!(
            "a={} b={} t={}",
            rect_str(&h.rect_a()),
            rect_str(&h.rect_b()),
            h.threshold()
        ),
        Feature::ControlPoints(c) => {
            format!("pos={} neg={} v={}", points_str(c.pos()), points_str(c.neg()), c.v())
        }
        Feature::SymmetricHaar(s) => {
            let (z1a, z1b) = s.z1();
            let (z3a, z3b) = s.z3();
            let t = s.thresholds();
            format!(
                "z1a={} z1b={} z3a={} z3b={} t1={} t2={} t3={} tdiff1={} tdiff2={}",
                rect_str(&z1a),
                rect_str(&z1b),
                rect_str(&z3a),
                rect_str(&z3b),
                t.t1,
                t.t2,
                t.t3,
                t.t_diff1,
                t.t_diff2
            )
        }
        Feature::NConnexity(n) => format!("chain={} v={}", chain_str(n.chain()), n.v()),
    }
}

pub fn format_model(model: &StrongClassifier) -> String {
    let (w, h) = model.window_size();
    let mut out = format!("{FORMAT_MAGIC} {FORMAT_VERSION}\nwindow {w} {h}\nstages {}\n", model.len());
    for s in model.stages() {
        let polarity = match s.weak.polarity {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
        };
        out.push_str(&format!(
            "stage alpha={} polarity={} family={} {}\n",
            s.alpha,
            polarity,
            s.weak.feature.kind().name(),
            feature_fields(&s.weak.feature)
        ));
    }
    out
}

struct Fields<'a> {
    line: usize,
    map: HashMap<&'a str, &'a str>,
}

impl<'a> Fields<'a> {
    fn err(&self, msg: impl Into<String>) -> LineError {
        LineError::new(self.line, msg)
    }

    fn get(&self, key: &str) -> Result<&'a str, LineError> {
        self.map
            .get(key)
            .copied()
            .ok_or_else(|| self.err(format!("missing field `{key}`")))
    }

    fn real(&self, key: &str) -> Result<f64, LineError> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| self.err(format!("field `{key}` = {v:?} is not a number")))
    }

    fn byte(&self, key: &str) -> Result<u8, LineError> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| self.err(format!("field `{key}` = {v:?} is not an integer in 0..=255")))
    }

    fn usizes(&self, key: &str, text: &str, n: usize, sep: char) -> Result<Vec<usize>, LineError> {
        let parts: Vec<&str> = text.split(sep).collect();
        if parts.len() != n {
            return Err(self.err(format!("field `{key}` = {text:?} needs {n} values")));
        }
        parts
            .iter()
            .map(|p| {
                p.parse()
                    .map_err(|_| self.err(format!("field `{key}` has a bad coordinate {p:?}")))
            })
            .collect()
    }

    fn rect(&self, key: &str) -> Result<Rect, LineError> {
        let v = self.usizes(key, self.get(key)?, 4, ',')?;
        Ok(Rect::new(v[0], v[1], v[2], v[3]))
    }

    fn points(&self, key: &str) -> Result<Vec<Point>, LineError> {
        self.get(key)?
            .split(';')
            .map(|p| {
                let v = self.usizes(key, p, 2, ':')?;
                Ok(Point::new(v[0], v[1]))
            })
            .collect()
    }

    fn chain(&self, key: &str) -> Result<Vec<ChainPoint>, LineError> {
        self.get(key)?
            .split(';')
            .map(|item| {
                let (xy, tag) = item
                    .rsplit_once(':')
                    .ok_or_else(|| self.err(format!("bad chain point {item:?}")))?;
                let class = match tag {
                    "+" => PointClass::Pos,
                    "-" => PointClass::Neg,
                    _ => return Err(self.err(format!("bad chain tag {tag:?}"))),
                };
                let v = self.usizes(key, xy, 2, ':')?;
                Ok(ChainPoint::new(v[0], v[1], class))
            })
            .collect()
    }
}

fn parse_stage(line_no: usize, rest: &str) -> Result<Stage, LineError> {
    let mut map = HashMap::new();
    for token in rest.split_whitespace() {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| LineError::new(line_no, format!("expected key=value, found {token:?}")))?;
        if map.insert(k, v).is_some() {
            return Err(LineError::new(line_no, format!("duplicate field `{k}`")));
        }
    }
    let f = Fields { line: line_no, map };
    let alpha = f.real("alpha")?;
    let polarity = match f.get("polarity")? {
        "+" => Polarity::Positive,
        "-" => Polarity::Negative,
        other => return Err(f.err(format!("polarity must be + or -, found {other:?}"))),
    };
    let family_name = f.get("family")?;
    let family = FeatureKind::from_name(family_name)
        .ok_or_else(|| f.err(format!("unknown family {family_name:?}")))?;
    let invalid = |e: crate::features::FeatureError| f.err(format!("invalid {family} feature: {e}"));
    let feature: Feature = match family {
        FeatureKind::Haar => HaarFeature::new(f.rect("a")?, f.rect("b")?, f.real("t")?)
            .map_err(invalid)?
            .into(),
        FeatureKind::ControlPoints => ControlPointsFeature::new(f.points("pos")?, f.points("neg")?, f.byte("v")?)
            .map_err(invalid)?
            .into(),
        FeatureKind::SymmetricHaar => {
            let t = SymmetricThresholds {
                t1: f.real("t1")?,
                t2: f.real("t2")?,
                t3: f.real("t3")?,
                t_diff1: f.real("tdiff1")?,
                t_diff2: f.real("tdiff2")?,
            };
            SymmetricHaarFeature::new(f.rect("z1a")?, f.rect("z1b")?, f.rect("z3a")?, f.rect("z3b")?, t)
                .map_err(invalid)?
                .into()
        }
        FeatureKind::NConnexity => NConnexityFeature::new(f.chain("chain")?, f.byte("v")?)
            .map_err(invalid)?
            .into(),
    };
    Ok(Stage {
        alpha,
        weak: WeakClassifier::new(feature, polarity),
    })
}

pub fn parse_model(text: &str) -> Result<StrongClassifier, LineError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (n, header) = lines.next().ok_or_else(|| LineError::new(1, "empty model file"))?;
    match header.split_whitespace().collect::<Vec<_>>()[..] {
        [FORMAT_MAGIC, v] if v == FORMAT_VERSION.to_string() => {}
        [FORMAT_MAGIC, v] => return Err(LineError::new(n, format!("unsupported model version {v}"))),
        _ => return Err(LineError::new(n, format!("expected `{FORMAT_MAGIC} {FORMAT_VERSION}`"))),
    }

    let (n, window) = lines.next().ok_or_else(|| LineError::new(n + 1, "missing window line"))?;
    let expected_window = format!("window {CANONICAL_W} {CANONICAL_H}");
    if window.split_whitespace().collect::<Vec<_>>().join(" ") != expected_window {
        return Err(LineError::new(n, format!("expected `{expected_window}`")));
    }

    let (n, count_line) = lines.next().ok_or_else(|| LineError::new(n + 1, "missing stages line"))?;
    let count: usize = count_line
        .strip_prefix("stages")
        .and_then(|c| c.trim().parse().ok())
        .ok_or_else(|| LineError::new(n, "expected `stages <count>`"))?;

    let mut stages = Vec::with_capacity(count);
    let mut last = n;
    for (n, line) in lines {
        last = n;
        let rest = line
            .strip_prefix("stage ")
            .ok_or_else(|| LineError::new(n, "expected a `stage` record"))?;
        let stage = parse_stage(n, rest)?;
        if !(stage.alpha.is_finite() && stage.alpha > 0.0) {
            return Err(LineError::new(n, "alpha must be finite and positive"));
        }
        stages.push(stage);
    }
    if stages.len() != count {
        return Err(LineError::new(
            last,
            format!("header announces {count} stages, file holds {}", stages.len()),
        ));
    }
    StrongClassifier::new(stages).map_err(|e| LineError::new(last, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_model() -> StrongClassifier {
        let haar = HaarFeature::new(Rect::new(0, 0, 16, 24), Rect::new(16, 0, 16, 24), 0.1 + 0.2).unwrap();
        let nc = NConnexityFeature::new(
            vec![ChainPoint::new(3, 4, PointClass::Pos), ChainPoint::new(4, 5, PointClass::Neg)],
            40,
        )
        .unwrap();
        StrongClassifier::new(vec![
            Stage { alpha: 3f64.ln(), weak: WeakClassifier::new(haar.into(), Polarity::Positive) },
            Stage { alpha: 1e-7, weak: WeakClassifier::new(nc.into(), Polarity::Negative) },
        ])
        .unwrap()
    }

    #[test]
    fn format_layout() {
        let text = format_model(&sample_model());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "boostdet-model 1");
        assert_eq!(lines[1], "window 32 24");
        assert_eq!(lines[2], "stages 2");
        assert_eq!(
            lines[3],
            "stage alpha=1.0986122886681098 polarity=+ family=haar a=0,0,16,24 b=16,0,16,24 t=0.30000000000000004"
        );
        assert!(lines[4].ends_with("family=nconnex chain=3:4:+;4:5:- v=40"));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = sample_model();
        let parsed = parse_model(&format_model(&m)).unwrap();
        assert_eq!(parsed, m);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let good = format_model(&sample_model());
        let err = parse_model(&good.replace("boostdet-model 1", "boostdet-model 2")).unwrap_err();
        assert_eq!(err.line, 1);
        let err = parse_model(&good.replace("window 32 24", "window 16 16")).unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse_model(&good.replace("stages 2", "stages 3")).unwrap_err();
        assert!(err.message.contains("announces 3"));
        let err = parse_model(&good.replace("polarity=-", "polarity=x")).unwrap_err();
        assert_eq!(err.line, 5);
        let err = parse_model(&good.replace("v=40", "v=0")).unwrap_err();
        assert_eq!(err.line, 5);
        assert!(err.message.contains("invalid nconnex"));
        let err = parse_model(&good.replace("family=haar", "family=lbp")).unwrap_err();
        assert_eq!(err.line, 4);
        let err = parse_model(&good.replace("alpha=1.0986122886681098", "alpha=-1")).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(parse_model("").is_err());
    }
}
