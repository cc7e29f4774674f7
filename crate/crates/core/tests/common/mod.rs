//! Independent oracles shared by the integration tests and the acceptance
//! harness: random sketch generators, central finite differences and an
//! exhaustive search over removal sequences.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use rand::Rng;

use sketchcoach_core::classifier::{ClassifierModel, InputTensor, Label};
use sketchcoach_core::optimize::{total_loss, total_loss_gradient, LossWeights};
use sketchcoach_core::sketch::{remove_segment, IndicatorFlag, Point, Sketch};

/// Random valid sketch: `strokes` strokes of 2..=`max_len` points inside
/// `[lo, hi]` on both axes.
pub fn random_sketch<R: Rng>(rng: &mut R, strokes: usize, max_len: usize, lo: f64, hi: f64) -> Sketch {
    let mut points = Vec::new();
    for _ in 0..strokes {
        let n = rng.gen_range(2..=max_len.max(2));
        for k in 0..n {
            let (x, y) = (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi));
            points.push(if k == 0 { Point::pen_up(x, y) } else { Point::drawn(x, y) });
        }
    }
    Sketch::from_points(points).expect("generator emits valid sketches")
}

/// Random sketch whose consecutive points are at least 60 units apart, so
/// distance terms are smooth on the scale of a finite-difference step.
pub fn spread_sketch<R: Rng>(rng: &mut R) -> Sketch {
    let strokes = rng.gen_range(1..4);
    let mut points: Vec<Point> = Vec::new();
    for _ in 0..strokes {
        let n = rng.gen_range(2..=8);
        for k in 0..n {
            let (x, y) = loop {
                let c = (rng.gen_range(20.0..235.0), rng.gen_range(20.0..235.0));
                if points.last().is_none_or(|p| (p.x - c.0).hypot(p.y - c.1) >= 60.0) {
                    break c;
                }
            };
            points.push(if k == 0 { Point::pen_up(x, y) } else { Point::drawn(x, y) });
        }
    }
    Sketch::from_points(points).expect("generator emits valid sketches")
}

/// Random sketch with at most `max_segments` segments on integer coordinates.
pub fn small_sketch<R: Rng>(rng: &mut R, max_segments: usize) -> Sketch {
    let mut budget = rng.gen_range(1..=max_segments);
    let mut strokes: Vec<Vec<(f64, f64)>> = Vec::new();
    while budget > 0 {
        let segs = rng.gen_range(1..=budget.min(4));
        budget -= segs;
        strokes.push(
            (0..=segs)
                .map(|_| (rng.gen_range(0..=255) as f64, rng.gen_range(0..=255) as f64))
                .collect(),
        );
    }
    Sketch::from_strokes(&strokes).expect("generator emits valid sketches")
}

/// `|a - f| / max(|a|, |f|, 1e-8)`.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct FdReport {
    pub max_rel: f64,
    pub checked: usize,
    /// Coordinates whose stencil crossed a ReLU kink.
    pub skipped: usize,
}

impl FdReport {
    pub fn merge(&mut self, other: FdReport) {
        self.max_rel = self.max_rel.max(other.max_rel);
        self.checked += other.checked;
        self.skipped += other.skipped;
    }
}

fn shifted(t: &InputTensor, index: usize, delta: f64) -> InputTensor {
    let mut data = t.as_slice().to_vec();
    data[index] += delta;
    InputTensor::from_raw(data).expect("same shape")
}

/// Classifier input gradient against central differences with step `h` in
/// normalized coordinates.
pub fn fd_classifier(model: &ClassifierModel, t: &InputTensor, y: Label, h: f64) -> FdReport {
    let analytic = model.tensor_gradient(t, y).unwrap().gradient;
    let pattern = model.activation_pattern(t);
    let mut report = FdReport::default();
    for pos in 0..t.occupied() {
        for ch in 0..2 {
            let idx = pos * 3 + ch;
            let (plus, minus) = (shifted(t, idx, h), shifted(t, idx, -h));
            if model.activation_pattern(&plus) != pattern || model.activation_pattern(&minus) != pattern {
                report.skipped += 1;
                continue;
            }
            let numeric = (model.tensor_loss(&plus, y).unwrap() - model.tensor_loss(&minus, y).unwrap()) / (2.0 * h);
            report.max_rel = report.max_rel.max(rel_err(analytic[pos][ch], numeric));
            report.checked += 1;
        }
    }
    report
}

fn moved(s: &Sketch, i: usize, axis: usize, delta: f64) -> Sketch {
    let mut pts = s.points().to_vec();
    if axis == 0 {
        pts[i].x += delta;
    } else {
        pts[i].y += delta;
    }
    Sketch::from_points(pts).unwrap()
}

/// Sum of the magnitudes of the summands making up each total-loss gradient
/// component: the classifier term, the point's displacement term and the
/// two adjacent travel terms. A component whose summands nearly cancel is
/// judged against this scale instead of its own small value.
pub fn total_gradient_scale(model: &ClassifierModel, z: &Sketch, x: &Sketch, y: Label, w: &LossWeights) -> Vec<[f64; 2]> {
    let n = z.len();
    let lc = model.input_gradient(z, y).unwrap().canvas_gradient(n);
    let (zp, xp) = (z.points(), x.points());
    let unit = |a: &Point, b: &Point| {
        let d = (b.x - a.x).hypot(b.y - a.y);
        if d > 0.0 { [((b.x - a.x) / d).abs(), ((b.y - a.y) / d).abs()] } else { [0.0, 0.0] }
    };
    (0..n)
        .map(|i| {
            let mut s = [w.beta_c * lc[i][0].abs(), w.beta_c * lc[i][1].abs()];
            let p = unit(&xp[i], &zp[i]);
            let prev = if i > 0 { unit(&zp[i - 1], &zp[i]) } else { [0.0; 2] };
            let next = if i + 1 < n { unit(&zp[i], &zp[i + 1]) } else { [0.0; 2] };
            for a in 0..2 {
                s[a] += w.beta_p * p[a] + w.beta_e * (prev[a] + next[a]);
            }
            s
        })
        .collect()
}

/// Total-loss gradient against central differences with step `h` in
/// normalized coordinates (`255 h` canvas units). The relative error of a
/// component is `|a - f| / max(|a|, |f|, scale)` with `scale` from
/// [`total_gradient_scale`].
pub fn fd_total(model: &ClassifierModel, z: &Sketch, x: &Sketch, y: Label, w: &LossWeights, h: f64) -> FdReport {
    let analytic = total_loss_gradient(model, z, x, y, w).unwrap();
    let scale = total_gradient_scale(model, z, x, y, w);
    let enc = |s: &Sketch| model.activation_pattern(&sketchcoach_core::classifier::encode(s));
    let pattern = enc(z);
    let hc = h * 255.0;
    let mut report = FdReport::default();
    for i in 0..z.len() {
        for axis in 0..2 {
            let (plus, minus) = (moved(z, i, axis, hc), moved(z, i, axis, -hc));
            if enc(&plus) != pattern || enc(&minus) != pattern {
                report.skipped += 1;
                continue;
            }
            let numeric =
                (total_loss(model, &plus, x, y, w).unwrap() - total_loss(model, &minus, x, y, w).unwrap()) / (2.0 * hc);
            let a = analytic[i][axis];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(scale[i][axis]).max(1e-8);
            report.max_rel = report.max_rel.max(rel);
            report.checked += 1;
        }
    }
    report
}

fn key(s: &Sketch) -> Vec<(u64, u64, i8)> {
    s.points()
        .iter()
        .map(|p| {
            let f = match p.flag {
                IndicatorFlag::PenUp => 0,
                IndicatorFlag::Drawn => 1,
                IndicatorFlag::Empty => -1,
            };
            (p.x.to_bits(), p.y.to_bits(), f)
        })
        .collect()
}

/// Every sketch reachable from `x` by zero or more segment removals.
pub fn removal_closure(x: &Sketch) -> Vec<Sketch> {
    let mut seen = HashSet::from([key(x)]);
    let mut queue = VecDeque::from([x.clone()]);
    let mut out = Vec::new();
    while let Some(s) = queue.pop_front() {
        for seg in s.segments() {
            let z = remove_segment(&s, seg).expect("listed segment is valid");
            if seen.insert(key(&z)) {
                queue.push_back(z);
            }
        }
        out.push(s);
    }
    out
}
