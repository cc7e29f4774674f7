use thiserror::Error;

use super::quickdraw::RawDrawing;
use crate::classifier::{Label, CANVAS_SIZE, SEQ_LEN};
use crate::sketch::Sketch;

/// Ordered class names; a label is a position in this list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassMap {
    names: Vec<String>,
}

impl ClassMap {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    /// Classes in order of first appearance.
    pub fn from_drawings(drawings: &[RawDrawing]) -> Self {
        let mut names: Vec<String> = Vec::new();
        for d in drawings {
            if !names.contains(&d.word) {
                names.push(d.word.clone());
            }
        }
        Self { names }
    }

    pub fn index_of(&self, name: &str) -> Option<Label> {
        self.names.iter().position(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("drawing has no stroke with at least two points")]
    NoStrokes,
}

/// Converts a raw drawing into a canonical labelled sketch.
///
/// Coordinates are clamped to the canvas, single-point strokes are dropped
/// and drawings longer than the classifier window are cut to its first
/// `SEQ_LEN` points (a stroke left with one point by the cut is dropped too).
pub fn ingest(raw: &RawDrawing, classes: &ClassMap) -> Result<(Sketch, Label), IngestError> {
    let label = classes
        .index_of(&raw.word)
        .ok_or_else(|| IngestError::UnknownClass(raw.word.clone()))?;
    let strokes: Vec<Vec<(f64, f64)>> = raw
        .strokes
        .iter()
        .filter(|(xs, _)| xs.len() >= 2)
        .map(|(xs, ys)| {
            xs.iter()
                .zip(ys)
                .map(|(&x, &y)| (clamp(x), clamp(y)))
                .collect()
        })
        .collect();
    if strokes.is_empty() {
        return Err(IngestError::NoStrokes);
    }
    let sketch = Sketch::from_strokes(&strokes)
        .expect("strokes of two or more finite points are valid")
        .truncated(SEQ_LEN)
        .with_class(raw.word.clone());
    Ok((sketch, label))
}

fn clamp(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, CANVAS_SIZE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::IndicatorFlag;

    fn raw(strokes: Vec<(Vec<f64>, Vec<f64>)>) -> RawDrawing {
        RawDrawing {
            word: "cup".into(),
            strokes,
        }
    }

    fn classes() -> ClassMap {
        ClassMap::new(["mug", "cup"])
    }

    #[test]
    fn two_point_stroke() {
        let (s, y) = ingest(&raw(vec![(vec![1.0, 2.0], vec![3.0, 4.0])]), &classes()).unwrap();
        assert_eq!(y, 1);
        let flags: Vec<_> = s.points().iter().map(|p| p.flag).collect();
        assert_eq!(flags, vec![IndicatorFlag::PenUp, IndicatorFlag::Drawn]);
        assert_eq!(s.class(), Some("cup"));
    }

    #[test]
    fn singleton_dropped() {
        let (s, _) = ingest(
            &raw(vec![(vec![9.0], vec![9.0]), (vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0])]),
            &classes(),
        )
        .unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.stroke_count(), 1);
    }

    #[test]
    fn long_drawing_truncated() {
        let xs: Vec<f64> = (0..120).map(|i| i as f64).collect();
        let (s, _) = ingest(&raw(vec![(xs.clone(), xs)]), &classes()).unwrap();
        assert_eq!(s.len(), 104);
    }

    #[test]
    fn clamps_out_of_range() {
        let (s, _) = ingest(&raw(vec![(vec![-5.0, 300.0], vec![10.0, 20.0])]), &classes()).unwrap();
        assert_eq!((s.points()[0].x, s.points()[1].x), (0.0, 255.0));
    }

    #[test]
    fn rejections() {
        assert_eq!(
            ingest(&raw(vec![(vec![1.0], vec![1.0])]), &classes()),
            Err(IngestError::NoStrokes)
        );
        let mut other = raw(vec![(vec![1.0, 2.0], vec![1.0, 2.0])]);
        other.word = "plate".into();
        assert_eq!(
            ingest(&other, &classes()),
            Err(IngestError::UnknownClass("plate".into()))
        );
    }
}
