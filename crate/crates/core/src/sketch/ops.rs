//! The alteration operators: segment removal, stroke reversal and stroke
//! reordering. Each operator is expressed as a [`Rewrite`] (a list of source
//! point indices with new flags) so that callers can carry per-point
//! metadata, such as the original point index, through the same edit.

use std::ops::Range;

use super::{IndicatorFlag, Point, Segment, Sketch, SketchError};

/// Output point `k` is source point `self.0[k].0` with flag `self.0[k].1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Rewrite(Vec<(usize, IndicatorFlag)>);

impl Rewrite {
    pub fn apply(&self, s: &Sketch) -> Sketch {
        let src = s.points();
        let points = self
            .0
            .iter()
            .map(|&(i, flag)| Point::new(src[i].x, src[i].y, flag))
            .collect();
        Sketch::from_points_unchecked(points, s.class.clone())
    }

    pub fn apply_tags<T: Copy>(&self, tags: &[T]) -> Vec<T> {
        self.0.iter().map(|&(i, _)| tags[i]).collect()
    }

    pub fn remove_segment(s: &Sketch, seg: Segment) -> Result<Rewrite, SketchError> {
        if !s.is_segment(seg) {
            return Err(SketchError::InvalidSegment(seg.index));
        }
        let pts = s.points();
        let i = seg.index;
        let start = (0..=i)
            .rev()
            .find(|&j| pts[j].flag == IndicatorFlag::PenUp)
            .expect("validated sketch starts with pen-up");
        let mut last = i + 1;
        while last + 1 < pts.len() && pts[last + 1].flag == IndicatorFlag::Drawn {
            last += 1;
        }

        // (dropped point range, point whose pen is lifted)
        let (drop, lift) = if last == start + 1 {
            (start..last + 1, None)
        } else if i == start {
            (i..i + 1, Some(i + 1))
        } else if i + 1 == last {
            (last..last + 1, None)
        } else {
            (0..0, Some(i + 1))
        };

        let out = pts
            .iter()
            .enumerate()
            .filter(|(j, _)| !drop.contains(j))
            .map(|(j, p)| {
                if Some(j) == lift {
                    (j, IndicatorFlag::PenUp)
                } else {
                    (j, p.flag)
                }
            })
            .collect();
        Ok(Rewrite(out))
    }

    pub fn reverse_stroke(s: &Sketch, k: usize) -> Result<Rewrite, SketchError> {
        let strokes = s.strokes();
        let stroke = *strokes.get(k).ok_or(SketchError::InvalidStroke {
            index: k,
            count: strokes.len(),
        })?;
        let pts = s.points();
        let mut out: Vec<(usize, IndicatorFlag)> = (0..stroke.start).map(|j| (j, pts[j].flag)).collect();
        for (n, j) in (stroke.start..stroke.end()).rev().enumerate() {
            let flag = if n == 0 {
                IndicatorFlag::PenUp
            } else {
                IndicatorFlag::Drawn
            };
            out.push((j, flag));
        }
        out.extend((stroke.end()..pts.len()).map(|j| (j, pts[j].flag)));
        Ok(Rewrite(out))
    }

    pub fn cut_paste(s: &Sketch, range: Range<usize>, at: InsertAt) -> Result<Rewrite, SketchError> {
        let strokes = s.strokes();
        let count = strokes.len();
        if range.start >= range.end || range.end > count {
            return Err(SketchError::InvalidRange {
                start: range.start,
                end: range.end,
                count,
            });
        }
        let mut rest: Vec<usize> = (0..count).filter(|k| !range.contains(k)).collect();
        let pos = match at {
            InsertAt::Front => 0,
            InsertAt::After(k) if k >= count => {
                return Err(SketchError::InvalidStroke { index: k, count })
            }
            InsertAt::After(k) if range.contains(&k) => return Err(SketchError::OverlappingInsert),
            InsertAt::After(k) => rest.iter().position(|&r| r == k).expect("k outside range") + 1,
        };
        let tail = rest.split_off(pos);
        let order = rest.into_iter().chain(range).chain(tail);

        let pts = s.points();
        let mut out = Vec::with_capacity(pts.len());
        for k in order {
            let st = strokes[k];
            out.extend((st.start..st.end()).map(|j| (j, pts[j].flag)));
        }
        Ok(Rewrite(out))
    }
}

/// Where a cut stroke range is pasted back.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertAt {
    /// Before every remaining stroke.
    Front,
    /// Directly after the given stroke (an index into the input sketch).
    After(usize),
}

/// Erases exactly one visible segment.
///
/// A two-point stroke disappears; a stroke-initial segment drops its first
/// point; a stroke-final segment drops its last point; an interior segment
/// splits the stroke in two by lifting the pen at `seg.index + 1`.
pub fn remove_segment(s: &Sketch, seg: Segment) -> Result<Sketch, SketchError> {
    Ok(Rewrite::remove_segment(s, seg)?.apply(s))
}

/// Reverses the point order of stroke `k` in place.
pub fn reverse_stroke(s: &Sketch, k: usize) -> Result<Sketch, SketchError> {
    Ok(Rewrite::reverse_stroke(s, k)?.apply(s))
}

/// Cuts the strokes in `range` and pastes them at `at`.
pub fn cut_paste_strokes(s: &Sketch, range: Range<usize>, at: InsertAt) -> Result<Sketch, SketchError> {
    Ok(Rewrite::cut_paste(s, range, at)?.apply(s))
}
