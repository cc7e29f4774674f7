//! Procedural QuickDraw-style drawings for offline experiments.
//!
//! Five shape classes are drawn the way people tend to draw them: varying
//! stroke decomposition, start corner and direction, wobbly lines, optional
//! details (doors, windows, flap lines) and occasional unrelated scribbles. Output follows the QuickDraw simplified conventions:
//! integer coordinates, aligned to the top-left corner and scaled so the
//! larger side spans 0..=255.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::quickdraw::RawDrawing;

pub const SYNTH_CLASSES: [&str; 5] = ["circle", "square", "triangle", "house", "envelope"];

type Pt = (f64, f64);
type Poly = Vec<Pt>;

/// `per_class` drawings of every class, interleaved class by class.
pub fn generate(per_class: usize, seed: u64) -> Vec<RawDrawing> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_class * SYNTH_CLASSES.len());
    for _ in 0..per_class {
        for class in SYNTH_CLASSES {
            out.push(draw(class, &mut rng));
        }
    }
    out
}

pub fn draw<R: Rng>(class: &str, rng: &mut R) -> RawDrawing {
    let mut strokes = match class {
        "circle" => circle(rng),
        "square" => square(rng),
        "triangle" => triangle(rng),
        "house" => house(rng),
        "envelope" => envelope(rng),
        other => panic!("unknown synthetic class {other:?}"),
    };
    if rng.gen_bool(0.35) {
        for _ in 0..rng.gen_range(1..=2) {
            let at = rng.gen_range(0..=strokes.len());
            strokes.insert(at, scribble(rng));
        }
    }
    let strokes = distort(strokes, rng);
    RawDrawing {
        word: class.to_string(),
        strokes: normalize(&strokes),
    }
}

/// Evenly spaced points from `a` to `b` with sideways jitter; excludes `a`.
fn edge<R: Rng>(a: Pt, b: Pt, rng: &mut R) -> Poly {
    let len = (b.0 - a.0).hypot(b.1 - a.1);
    let n = ((len / 0.22).round() as usize + rng.gen_range(0..=1)).clamp(1, 6);
    let (nx, ny) = if len > 0.0 {
        (-(b.1 - a.1) / len, (b.0 - a.0) / len)
    } else {
        (0.0, 0.0)
    };
    let bow = rng.gen_range(-0.04..0.04);
    (1..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let off = if i == n {
                0.0
            } else {
                bow * (PI * t).sin() + rng.gen_range(-0.015..0.015)
            };
            (a.0 + t * (b.0 - a.0) + off * nx, a.1 + t * (b.1 - a.1) + off * ny)
        })
        .collect()
}

/// Path through `corners` (each edge jittered), starting at the first.
fn path<R: Rng>(corners: &[Pt], rng: &mut R) -> Poly {
    let mut out = vec![jitter(corners[0], 0.02, rng)];
    for w in corners.windows(2) {
        let b = jitter(w[1], 0.02, rng);
        let a = *out.last().unwrap();
        out.extend(edge(a, b, rng));
    }
    out
}

fn jitter<R: Rng>(p: Pt, r: f64, rng: &mut R) -> Pt {
    (p.0 + rng.gen_range(-r..r), p.1 + rng.gen_range(-r..r))
}

/// Draws a closed polygon split into 1, 2 or `n` strokes with a random start
/// corner and direction.
fn closed_polygon<R: Rng>(corners: &[Pt], rng: &mut R) -> Vec<Poly> {
    let n = corners.len();
    let start = rng.gen_range(0..n);
    let forward = rng.gen_bool(0.5);
    let order: Vec<Pt> = (0..=n)
        .map(|i| {
            let k = if forward { (start + i) % n } else { (start + n - i % n) % n };
            corners[k]
        })
        .collect();
    let pieces = match rng.gen_range(0..10) {
        0..=4 => 1,
        5..=7 => 2,
        _ => n,
    };
    let mut strokes = Vec::new();
    let cuts: Vec<usize> = (0..=pieces).map(|j| j * n / pieces).collect();
    for w in cuts.windows(2) {
        strokes.push(path(&order[w[0]..=w[1]], rng));
    }
    strokes
}

fn circle<R: Rng>(rng: &mut R) -> Vec<Poly> {
    let aspect = rng.gen_range(0.75..1.3);
    let n = rng.gen_range(10..20);
    let start = rng.gen_range(0.0..2.0 * PI);
    let dir = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let span = 2.0 * PI + rng.gen_range(-0.4..0.5);
    let (f1, f2) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
    let amp = rng.gen_range(0.0..0.08);
    let ring: Poly = (0..=n)
        .map(|i| {
            let t = start + dir * span * i as f64 / n as f64;
            let r = 0.5 * (1.0 + amp * ((2.0 * t + f1).sin() + (3.0 * t + f2).cos()));
            (0.5 + aspect * r * t.cos(), 0.5 + r * t.sin())
        })
        .collect();
    if rng.gen_bool(0.2) {
        let cut = rng.gen_range(3..n - 2);
        vec![ring[..=cut].to_vec(), ring[cut..].to_vec()]
    } else {
        vec![ring]
    }
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> [Pt; 4] {
    [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
}

fn square<R: Rng>(rng: &mut R) -> Vec<Poly> {
    let w = rng.gen_range(0.8..1.25);
    closed_polygon(&rect(0.0, 0.0, w, 1.0), rng)
}

fn triangle<R: Rng>(rng: &mut R) -> Vec<Poly> {
    let apex = rng.gen_range(0.3..0.7);
    let base = rng.gen_range(0.8..1.1);
    closed_polygon(&[(apex, 0.0), (base, 1.0), (0.0, 1.0)], rng)
}

fn house<R: Rng>(rng: &mut R) -> Vec<Poly> {
    let w = rng.gen_range(0.8..1.2);
    let top = rng.gen_range(0.3..0.5);
    let mut strokes = if rng.gen_bool(0.5) {
        closed_polygon(&rect(0.0, top, w, 1.0), rng)
    } else {
        // open box under the roof
        vec![path(&[(0.0, top), (0.0, 1.0), (w, 1.0), (w, top)], rng)]
    };
    let peak = (w * rng.gen_range(0.4..0.6), rng.gen_range(0.0..0.08));
    let roof = if rng.gen_bool(0.5) {
        [(0.0, top), peak, (w, top)]
    } else {
        [(w, top), peak, (0.0, top)]
    };
    if rng.gen_bool(0.8) {
        strokes.push(path(&roof, rng));
    } else {
        strokes.push(path(&roof[..2], rng));
        strokes.push(path(&roof[1..], rng));
    }
    if rng.gen_bool(0.6) {
        let dx = w * rng.gen_range(0.35..0.5);
        let dw = w * rng.gen_range(0.15..0.25);
        let dy = rng.gen_range(0.65..0.8);
        strokes.push(path(&[(dx, 1.0), (dx, dy), (dx + dw, dy), (dx + dw, 1.0)], rng));
    }
    if rng.gen_bool(0.4) {
        let x = w * rng.gen_range(0.1..0.25);
        let y = top + rng.gen_range(0.1..0.2);
        let s = rng.gen_range(0.12..0.2);
        strokes.extend(closed_polygon(&rect(x, y, x + s, y + s), rng));
    }
    strokes
}

fn envelope<R: Rng>(rng: &mut R) -> Vec<Poly> {
    let w = rng.gen_range(1.3..1.8);
    let mut strokes = closed_polygon(&rect(0.0, 0.0, w, 1.0), rng);
    let depth = rng.gen_range(0.35..0.6);
    let flap = [(0.0, 0.0), (w * rng.gen_range(0.4..0.6), depth), (w, 0.0)];
    if rng.gen_bool(0.85) {
        strokes.push(path(&flap, rng));
    } else {
        strokes.push(path(&flap[..2], rng));
        strokes.push(path(&flap[1..], rng));
    }
    if rng.gen_bool(0.25) {
        strokes.push(path(&[(0.0, 1.0), (w * 0.4, 0.55)], rng));
        strokes.push(path(&[(w, 1.0), (w * 0.6, 0.55)], rng));
    }
    strokes
}

fn scribble<R: Rng>(rng: &mut R) -> Poly {
    let mut p = (rng.gen_range(0.0..1.2), rng.gen_range(0.0..1.0));
    let mut out = vec![p];
    let mut heading = rng.gen_range(0.0..2.0 * PI);
    for _ in 0..rng.gen_range(2..6) {
        heading += rng.gen_range(-1.5..1.5);
        let step = rng.gen_range(0.08..0.25);
        p = (p.0 + step * heading.cos(), p.1 + step * heading.sin());
        out.push(p);
    }
    out
}

/// Random rotation, anisotropic scale and shear applied to the whole drawing.
fn distort<R: Rng>(strokes: Vec<Poly>, rng: &mut R) -> Vec<Poly> {
    let angle: f64 = rng.gen_range(-0.2..0.2);
    let (sx, sy) = (rng.gen_range(0.85..1.15), rng.gen_range(0.85..1.15));
    let shear = rng.gen_range(-0.1..0.1);
    let (c, s) = (angle.cos(), angle.sin());
    strokes
        .into_iter()
        .map(|line| {
            line.into_iter()
                .map(|(x, y)| {
                    let (x, y) = (sx * (x + shear * y), sy * y);
                    (c * x - s * y, s * x + c * y)
                })
                .collect()
        })
        .collect()
}

/// Top-left alignment, uniform scaling to 255, rounding to integers.
fn normalize(strokes: &[Poly]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let all = strokes.iter().flatten();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let scale = 255.0 / (x1 - x0).max(y1 - y0).max(1e-9);
    strokes
        .iter()
        .map(|line| {
            let mut xs: Vec<f64> = Vec::with_capacity(line.len());
            let mut ys: Vec<f64> = Vec::with_capacity(line.len());
            for &(x, y) in line {
                let (qx, qy) = (((x - x0) * scale).round(), ((y - y0) * scale).round());
                // rounding can merge neighbours
                if xs.last() == Some(&qx) && ys.last() == Some(&qy) {
                    continue;
                }
                xs.push(qx);
                ys.push(qy);
            }
            (xs, ys)
        })
        .collect()
}
