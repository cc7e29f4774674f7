use serde::{Deserialize, Serialize};

use super::{Sketch, SketchError};

/// Interchange form of a sketch: a class name and a list of stroke
/// polylines. Flags are implied by stroke boundaries.
///
/// ```json
/// {"class": "house", "strokes": [[[0.0, 0.0], [0.0, 10.0]], [[5.0, 5.0], [9.0, 9.0]]]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSketch {
    #[serde(default)]
    pub class: Option<String>,
    pub strokes: Vec<Vec<[f64; 2]>>,
}

impl From<&Sketch> for CanonicalSketch {
    fn from(s: &Sketch) -> Self {
        CanonicalSketch {
            class: s.class.clone(),
            strokes: s
                .polylines()
                .into_iter()
                .map(|line| line.into_iter().map(|(x, y)| [x, y]).collect())
                .collect(),
        }
    }
}

impl TryFrom<&CanonicalSketch> for Sketch {
    type Error = SketchError;

    fn try_from(c: &CanonicalSketch) -> Result<Self, Self::Error> {
        let strokes: Vec<Vec<(f64, f64)>> = c
            .strokes
            .iter()
            .map(|line| line.iter().map(|p| (p[0], p[1])).collect())
            .collect();
        let mut s = Sketch::from_strokes(&strokes)?;
        s.class = c.class.clone();
        Ok(s)
    }
}

impl Sketch {
    pub fn to_canonical(&self) -> CanonicalSketch {
        CanonicalSketch::from(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_canonical()).expect("sketch serializes")
    }

    pub fn from_json(text: &str) -> Result<Sketch, FormatError> {
        let c: CanonicalSketch = serde_json::from_str(text)?;
        Ok(Sketch::try_from(&c)?)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid sketch document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Sketch(#[from] SketchError),
}
