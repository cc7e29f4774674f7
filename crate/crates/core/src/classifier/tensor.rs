use crate::sketch::{IndicatorFlag, Point, Sketch};

/// Fixed sequence length seen by the classifier.
pub const SEQ_LEN: usize = 104;
/// x, y and indicator flag.
pub const CHANNELS: usize = 3;
/// Coordinates are divided by this before entering the network.
pub const CANVAS_SIZE: f64 = 255.0;

/// Classifier input: `SEQ_LEN` positions of `(x / 255, y / 255, flag)`.
///
/// Positions past the end of the sketch hold the padding value `(0, 0, -1)`;
/// sketches longer than `SEQ_LEN` are cut to their first `SEQ_LEN` points.
#[derive(Clone, Debug, PartialEq)]
pub struct InputTensor {
    data: Vec<f64>,
}

impl InputTensor {
    /// Wraps position-major raw values; `None` if the length is wrong.
    pub fn from_raw(data: Vec<f64>) -> Option<Self> {
        (data.len() == SEQ_LEN * CHANNELS).then_some(Self { data })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, position: usize, channel: usize) -> f64 {
        self.data[position * CHANNELS + channel]
    }

    /// Number of non-padding positions.
    pub fn occupied(&self) -> usize {
        (0..SEQ_LEN)
            .position(|t| self.get(t, 2) < -0.5)
            .unwrap_or(SEQ_LEN)
    }

    /// Rebuilds the sketch from the occupied positions.
    pub fn decode(&self) -> Option<Sketch> {
        let points = (0..self.occupied())
            .map(|t| {
                let flag = IndicatorFlag::from_value(self.get(t, 2).round() as i32)?;
                Some(Point::new(
                    self.get(t, 0) * CANVAS_SIZE,
                    self.get(t, 1) * CANVAS_SIZE,
                    flag,
                ))
            })
            .collect::<Option<Vec<_>>>()?;
        Sketch::from_points(points).ok()
    }
}

pub fn encode(s: &Sketch) -> InputTensor {
    let mut data = Vec::with_capacity(SEQ_LEN * CHANNELS);
    for p in s.points().iter().take(SEQ_LEN) {
        data.extend_from_slice(&[p.x / CANVAS_SIZE, p.y / CANVAS_SIZE, p.flag.value()]);
    }
    while data.len() < SEQ_LEN * CHANNELS {
        data.extend_from_slice(&[0.0, 0.0, -1.0]);
    }
    InputTensor { data }
}
