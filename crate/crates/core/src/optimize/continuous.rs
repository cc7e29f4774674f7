use crate::classifier::{ClassifierModel, Label, CANVAS_SIZE};
use crate::sketch::{effort_loss, point_diff_loss, Sketch, SketchError};

use super::config::{DescentConfig, LossWeights};
use super::search::Search;
use super::OptimizeError;

fn check_shape(z: &Sketch, x: &Sketch) -> Result<(), SketchError> {
    // point_diff_loss validates point count and flags
    point_diff_loss(z, x).map(|_| ())
}

/// `beta_c * L_C(z, y) + beta_p * L_P(x, z) + beta_e * L_E(z)`.
pub fn total_loss(
    model: &ClassifierModel,
    z: &Sketch,
    x: &Sketch,
    y: Label,
    w: &LossWeights,
) -> Result<f64, OptimizeError> {
    let lp = point_diff_loss(x, z)?;
    let lc = model.classifier_loss(z, y)?;
    Ok(w.beta_c * lc + w.beta_p * lp + w.beta_e * effort_loss(z))
}

fn unit(dx: f64, dy: f64) -> [f64; 2] {
    let n = dx.hypot(dy);
    // subgradient 0 where the distance is not differentiable
    if n > 0.0 {
        [dx / n, dy / n]
    } else {
        [0.0, 0.0]
    }
}

/// Gradient of [`total_loss`] with respect to each point's canvas
/// coordinates. Distance terms use a zero subgradient at coincident points.
pub fn total_loss_gradient(
    model: &ClassifierModel,
    z: &Sketch,
    x: &Sketch,
    y: Label,
    w: &LossWeights,
) -> Result<Vec<[f64; 2]>, OptimizeError> {
    check_shape(z, x)?;
    let n = z.len();
    let mut g = vec![[0.0; 2]; n];
    if w.beta_c != 0.0 {
        let lc = model.input_gradient(z, y)?;
        for (gi, ci) in g.iter_mut().zip(lc.canvas_gradient(n)) {
            gi[0] += w.beta_c * ci[0];
            gi[1] += w.beta_c * ci[1];
        }
    } else {
        model.classifier_loss(z, y)?;
    }
    let zp = z.points();
    if w.beta_p != 0.0 {
        for ((gi, p), q) in g.iter_mut().zip(zp).zip(x.points()) {
            let u = unit(p.x - q.x, p.y - q.y);
            gi[0] += w.beta_p * u[0];
            gi[1] += w.beta_p * u[1];
        }
    }
    if w.beta_e != 0.0 {
        for i in 0..n.saturating_sub(1) {
            let u = unit(zp[i + 1].x - zp[i].x, zp[i + 1].y - zp[i].y);
            g[i + 1][0] += w.beta_e * u[0];
            g[i + 1][1] += w.beta_e * u[1];
            g[i][0] -= w.beta_e * u[0];
            g[i][1] -= w.beta_e * u[1];
        }
    }
    Ok(g)
}

/// Fixed-step descent on a working copy of the current best. Each step moves
/// the point with the largest gradient by `step_size` canvas units (others
/// proportionally), clips to the canvas, and submits the result to the
/// acceptance test. The working copy keeps moving whether or not a step is
/// accepted.
pub(crate) fn run_continuous(search: &mut Search<'_>, w: &LossWeights, dcfg: &DescentConfig, steps: usize) {
    let anchors = search.reference.anchors(&search.best);
    let x = search.best.sketch.with_coordinates(&anchors);
    let mut z = search.best.clone();
    for step in 0..steps {
        let g = total_loss_gradient(search.model, &z.sketch, &x, search.label, w).expect("shape preserved");
        let gmax = g.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
        if !(gmax > 0.0) {
            break;
        }
        let scale = dcfg.step_size / gmax;
        let coords: Vec<[f64; 2]> = z
            .sketch
            .points()
            .iter()
            .zip(&g)
            .map(|(p, gi)| {
                [
                    (p.x - scale * gi[0]).clamp(0.0, CANVAS_SIZE),
                    (p.y - scale * gi[1]).clamp(0.0, CANVAS_SIZE),
                ]
            })
            .collect();
        z = z.with_coordinates(&coords);
        search.consider(z.clone(), None, step);
    }
}
