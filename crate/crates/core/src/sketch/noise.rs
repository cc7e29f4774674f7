use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Point, Sketch};

/// Jitters every coordinate by an independent uniform draw from `[-r, r]`.
///
/// Flags are untouched and the result is deterministic in `seed`. No canvas
/// clipping is applied.
pub fn add_noise(s: &Sketch, r: f64, seed: u64) -> Sketch {
    assert!(r >= 0.0, "noise radius must be non-negative");
    if r == 0.0 {
        return s.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = s
        .points()
        .iter()
        .map(|p| {
            let dx = rng.gen_range(-r..=r);
            let dy = rng.gen_range(-r..=r);
            Point::new(p.x + dx, p.y + dy, p.flag)
        })
        .collect();
    Sketch::from_points_unchecked(points, s.class.clone())
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::square;
    use super::*;

    #[test]
    fn zero_radius_is_identity() {
        assert_eq!(add_noise(&square(), 0.0, 3), square());
    }

    #[test]
    fn bounded_and_deterministic() {
        let sq = square();
        let a = add_noise(&sq, 10.0, 42);
        let b = add_noise(&sq, 10.0, 42);
        assert_eq!(a, b);
        assert_ne!(a, add_noise(&sq, 10.0, 43));
        for (p, q) in sq.points().iter().zip(a.points()) {
            assert_eq!(p.flag, q.flag);
            assert!((p.x - q.x).abs() <= 10.0);
            assert!((p.y - q.y).abs() <= 10.0);
            assert!(p.distance(q) <= 10.0 * 2f64.sqrt());
        }
    }
}
