//! Optimizes hand-drawn sketches for a fixed stroke classifier.
//!
//! Given a drawing and its intended class, the engine proposes a modified
//! drawing (segments erased, strokes reordered or reversed, points nudged)
//! that is quicker to draw or more reliably recognized, while staying within
//! a bounded distortion of the original.

pub mod sketch;

pub use sketch::{IndicatorFlag, Point, Segment, Sketch, SketchError, Stroke};
pub mod classifier;
pub mod data;
pub mod optimize;
pub mod pipeline;
pub mod render;

pub use classifier::{ClassifierModel, Label};
