use super::{IndicatorFlag, Sketch, SketchError};

/// Total hand travel: distances between all consecutive points, pen-up
/// transits included. The approach to the first point is not counted.
pub fn effort_loss(s: &Sketch) -> f64 {
    s.points()
        .windows(2)
        .map(|w| w[0].distance(&w[1]))
        .sum()
}

/// Length of the drawn strokes only.
pub fn visible_length(s: &Sketch) -> f64 {
    s.points()
        .windows(2)
        .filter(|w| w[1].flag == IndicatorFlag::Drawn)
        .map(|w| w[0].distance(&w[1]))
        .sum()
}

/// Absolute difference in visible length.
pub fn length_diff_loss(a: &Sketch, b: &Sketch) -> f64 {
    (visible_length(a) - visible_length(b)).abs()
}

/// Summed per-point displacement between two sketches with identical
/// structure (same point count, same flags).
pub fn point_diff_loss(a: &Sketch, b: &Sketch) -> Result<f64, SketchError> {
    if a.len() != b.len() {
        return Err(SketchError::ShapeMismatch(format!(
            "{} vs {} points",
            a.len(),
            b.len()
        )));
    }
    let mut total = 0.0;
    for (i, (p, q)) in a.points().iter().zip(b.points()).enumerate() {
        if p.flag != q.flag {
            return Err(SketchError::ShapeMismatch(format!(
                "flag differs at point {i}"
            )));
        }
        total += p.distance(q);
    }
    Ok(total)
}
