//! Point/stroke/segment data model for hand-drawn sketches.
//!
//! A [`Sketch`] is an ordered sequence of points, each tagged with an
//! [`IndicatorFlag`]. Strokes and segments are derived views: a stroke is a
//! `PenUp` point followed by one or more `Drawn` points, and a segment is a
//! pair of consecutive points inside one stroke.
//!
//! Sketches are immutable values. Every operator returns a new sketch that
//! satisfies the same structural invariants as its input.

mod format;
mod loss;
mod noise;
mod ops;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{CanonicalSketch, FormatError};
pub use loss::{effort_loss, length_diff_loss, point_diff_loss, visible_length};
pub use noise::add_noise;
pub use ops::{cut_paste_strokes, remove_segment, reverse_stroke, InsertAt};
pub(crate) use ops::Rewrite;

/// Per-point pen indicator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndicatorFlag {
    /// The pen moved to this point without drawing (stroke start).
    PenUp,
    /// A line was drawn from the previous point to this one.
    Drawn,
    /// Padding in fixed-length encodings.
    Empty,
}

impl IndicatorFlag {
    /// Numeric value used by the classifier input encoding.
    pub fn value(self) -> f64 {
        match self {
            IndicatorFlag::PenUp => 1.0,
            IndicatorFlag::Drawn => 0.0,
            IndicatorFlag::Empty => -1.0,
        }
    }

    pub fn from_value(v: i32) -> Option<Self> {
        match v {
            1 => Some(IndicatorFlag::PenUp),
            0 => Some(IndicatorFlag::Drawn),
            -1 => Some(IndicatorFlag::Empty),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub flag: IndicatorFlag,
}

impl Point {
    pub fn new(x: f64, y: f64, flag: IndicatorFlag) -> Self {
        Self { x, y, flag }
    }

    pub fn pen_up(x: f64, y: f64) -> Self {
        Self::new(x, y, IndicatorFlag::PenUp)
    }

    pub fn drawn(x: f64, y: f64) -> Self {
        Self::new(x, y, IndicatorFlag::Drawn)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A contiguous run of points drawn without lifting the pen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stroke {
    pub start: usize,
    pub len: usize,
}

impl Stroke {
    /// Index one past the last point.
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn last(&self) -> usize {
        self.start + self.len - 1
    }

    pub fn contains(&self, index: usize) -> bool {
        index >= self.start && index < self.end()
    }
}

/// Segment between `points[index]` and `points[index + 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub index: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SketchError {
    #[error("malformed sketch at point {index}: {reason}")]
    Structural { index: usize, reason: &'static str },
    #[error("stroke {index} has {len} point(s); at least 2 are required")]
    ShortStroke { index: usize, len: usize },
    #[error("coordinate at point {0} is not finite")]
    NonFinite(usize),
    #[error("no segment starts at point {0}")]
    InvalidSegment(usize),
    #[error("stroke index {index} out of range (sketch has {count} strokes)")]
    InvalidStroke { index: usize, count: usize },
    #[error("invalid stroke range {start}..{end} for {count} strokes")]
    InvalidRange { start: usize, end: usize, count: usize },
    #[error("insertion point lies inside the moved stroke range")]
    OverlappingInsert,
    #[error("sketches differ in shape: {0}")]
    ShapeMismatch(String),
}

/// An ordered, validated point sequence.
///
/// Trailing `Empty` padding is accepted on construction and stripped, so the
/// stored points never contain `Empty` flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sketch {
    points: Vec<Point>,
    class: Option<String>,
}

impl Sketch {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates `points` against the structural invariants.
    pub fn from_points(points: Vec<Point>) -> Result<Self, SketchError> {
        let mut points = points;
        let body = points
            .iter()
            .position(|p| p.flag == IndicatorFlag::Empty)
            .unwrap_or(points.len());
        if let Some(offset) = points[body..]
            .iter()
            .position(|p| p.flag != IndicatorFlag::Empty)
        {
            return Err(SketchError::Structural {
                index: body + offset,
                reason: "non-empty point after empty padding",
            });
        }
        points.truncate(body);
        validate(&points)?;
        Ok(Self {
            points,
            class: None,
        })
    }

    /// Builds a sketch from stroke polylines; the first point of each stroke
    /// is flagged `PenUp`, the rest `Drawn`.
    pub fn from_strokes<S: AsRef<[(f64, f64)]>>(strokes: &[S]) -> Result<Self, SketchError> {
        let mut points = Vec::new();
        for stroke in strokes {
            for (i, &(x, y)) in stroke.as_ref().iter().enumerate() {
                let flag = if i == 0 {
                    IndicatorFlag::PenUp
                } else {
                    IndicatorFlag::Drawn
                };
                points.push(Point::new(x, y, flag));
            }
        }
        Self::from_points(points)
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_points_unchecked(points: Vec<Point>, class: Option<String>) -> Self {
        debug_assert!(validate(&points).is_ok(), "invariant violated");
        Self { points, class }
    }

    pub fn with_class(mut self, class: impl Into<String>) -> Self {
        self.class = Some(class.into());
        self
    }

    pub fn class(&self) -> Option<&str> {
        self.class.as_deref()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Strokes in drawing order.
    pub fn strokes(&self) -> Vec<Stroke> {
        let mut strokes = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            if p.flag == IndicatorFlag::PenUp {
                strokes.push(Stroke { start: i, len: 1 });
            } else if let Some(last) = strokes.last_mut() {
                last.len += 1;
            }
        }
        strokes
    }

    pub fn stroke_count(&self) -> usize {
        self.points
            .iter()
            .filter(|p| p.flag == IndicatorFlag::PenUp)
            .count()
    }

    /// All visible segments, ordered by index.
    pub fn segments(&self) -> Vec<Segment> {
        (0..self.points.len().saturating_sub(1))
            .filter(|&i| self.points[i + 1].flag == IndicatorFlag::Drawn)
            .map(|index| Segment { index })
            .collect()
    }

    pub fn segment_count(&self) -> usize {
        self.points
            .iter()
            .filter(|p| p.flag == IndicatorFlag::Drawn)
            .count()
    }

    pub fn is_segment(&self, seg: Segment) -> bool {
        seg.index + 1 < self.points.len()
            && self.points[seg.index + 1].flag == IndicatorFlag::Drawn
    }

    pub fn segment_length(&self, seg: Segment) -> f64 {
        self.points[seg.index].distance(&self.points[seg.index + 1])
    }

    /// True when the segment is the first or last of its stroke.
    pub fn is_terminal_segment(&self, seg: Segment) -> bool {
        let first = self.points[seg.index].flag == IndicatorFlag::PenUp;
        let last = seg.index + 2 >= self.points.len()
            || self.points[seg.index + 2].flag != IndicatorFlag::Drawn;
        first || last
    }

    /// Stroke polylines as coordinate lists.
    pub fn polylines(&self) -> Vec<Vec<(f64, f64)>> {
        self.strokes()
            .iter()
            .map(|s| {
                self.points[s.start..s.end()]
                    .iter()
                    .map(|p| (p.x, p.y))
                    .collect()
            })
            .collect()
    }

    /// Same flags and class, new coordinates.
    pub(crate) fn with_coordinates(&self, coords: &[[f64; 2]]) -> Sketch {
        debug_assert_eq!(coords.len(), self.points.len());
        let points = self
            .points
            .iter()
            .zip(coords)
            .map(|(p, c)| Point::new(c[0], c[1], p.flag))
            .collect();
        Sketch {
            points,
            class: self.class.clone(),
        }
    }

    /// Keeps the first `max_points` points, dropping a trailing stroke that
    /// would be left with a single point.
    pub fn truncated(&self, max_points: usize) -> Sketch {
        if self.points.len() <= max_points {
            return self.clone();
        }
        let mut points = self.points[..max_points].to_vec();
        if points.last().map(|p| p.flag) == Some(IndicatorFlag::PenUp) {
            points.pop();
        }
        Sketch {
            points,
            class: self.class.clone(),
        }
    }
}

fn validate(points: &[Point]) -> Result<(), SketchError> {
    let mut stroke_index = 0;
    let mut run = 0usize;
    for (i, p) in points.iter().enumerate() {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(SketchError::NonFinite(i));
        }
        match p.flag {
            IndicatorFlag::Empty => {
                return Err(SketchError::Structural {
                    index: i,
                    reason: "empty point inside sketch body",
                })
            }
            IndicatorFlag::Drawn if i == 0 => {
                return Err(SketchError::Structural {
                    index: 0,
                    reason: "first point must be pen-up",
                })
            }
            IndicatorFlag::Drawn => run += 1,
            IndicatorFlag::PenUp => {
                if i > 0 && run < 2 {
                    return Err(SketchError::ShortStroke {
                        index: stroke_index,
                        len: run,
                    });
                }
                if i > 0 {
                    stroke_index += 1;
                }
                run = 1;
            }
        }
    }
    if !points.is_empty() && run < 2 {
        return Err(SketchError::ShortStroke {
            index: stroke_index,
            len: run,
        });
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn strokes_of_empty_sketch() {
        assert!(Sketch::empty().strokes().is_empty());
        assert!(Sketch::empty().segments().is_empty());
    }

    #[test]
    fn strokes_of_square() {
        let s = square();
        assert_eq!(
            s.strokes(),
            vec![Stroke { start: 0, len: 3 }, Stroke { start: 3, len: 2 }]
        );
        assert_eq!(s.segments().len(), 3);
        assert_eq!(s.segment_count(), 3);
    }

    #[test]
    fn collinear_single_stroke() {
        let s = line4();
        assert_eq!(s.strokes(), vec![Stroke { start: 0, len: 4 }]);
    }

    #[test]
    fn padding_is_stripped() {
        let mut pts = square().points().to_vec();
        pts.extend(std::iter::repeat(Point::new(0.0, 0.0, IndicatorFlag::Empty)).take(3));
        assert_eq!(Sketch::from_points(pts).unwrap(), square());
    }

    #[test]
    fn rejects_malformed() {
        let drawn_first = vec![Point::drawn(0.0, 0.0), Point::drawn(1.0, 1.0)];
        assert!(matches!(
            Sketch::from_points(drawn_first),
            Err(SketchError::Structural { index: 0, .. })
        ));

        let singleton = vec![
            Point::pen_up(0.0, 0.0),
            Point::pen_up(1.0, 1.0),
            Point::drawn(2.0, 2.0),
        ];
        assert_eq!(
            Sketch::from_points(singleton),
            Err(SketchError::ShortStroke { index: 0, len: 1 })
        );

        let gap = vec![
            Point::pen_up(0.0, 0.0),
            Point::drawn(1.0, 1.0),
            Point::new(0.0, 0.0, IndicatorFlag::Empty),
            Point::pen_up(2.0, 2.0),
            Point::drawn(3.0, 3.0),
        ];
        assert!(matches!(
            Sketch::from_points(gap),
            Err(SketchError::Structural { index: 3, .. })
        ));

        let trailing = vec![Point::pen_up(0.0, 0.0)];
        assert!(Sketch::from_points(trailing).is_err());

        let nan = vec![Point::pen_up(f64::NAN, 0.0), Point::drawn(1.0, 1.0)];
        assert_eq!(Sketch::from_points(nan), Err(SketchError::NonFinite(0)));
    }

    #[test]
    fn terminal_segments() {
        let s = line4();
        let terminal: Vec<_> = s
            .segments()
            .into_iter()
            .filter(|&g| s.is_terminal_segment(g))
            .map(|g| g.index)
            .collect();
        assert_eq!(terminal, vec![0, 2]);
    }

    #[test]
    fn truncation_drops_dangling_pen_up() {
        let s = square();
        let t = s.truncated(4);
        assert_eq!(t.len(), 3);
        assert_eq!(t.stroke_count(), 1);
        assert_eq!(s.truncated(100), s);
    }
}
