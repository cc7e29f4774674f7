use serde::{Deserialize, Serialize};

use crate::classifier::{encode, ClassifierModel, Label};
use crate::sketch::{effort_loss, length_diff_loss, CanonicalSketch, Sketch, SketchError};

use super::OptimizeError;

/// How to draw one stroke of the proposal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Instruction {
    /// Stroke of the original sketch this stroke was taken from.
    pub stroke_index: usize,
    /// Position in the proposed drawing order, starting at 1.
    pub draw_order: usize,
    /// Drawn in the opposite direction to the original.
    pub reversed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Metrics {
    pub predicted_before: Label,
    pub predicted_after: Label,
    /// Probability of the target label.
    pub confidence_before: f64,
    pub confidence_after: f64,
    pub correct_before: bool,
    pub correct_after: bool,
    pub classifier_loss_before: f64,
    pub classifier_loss_after: f64,
    pub effort_before: f64,
    pub effort_after: f64,
    pub length_diff: f64,
    /// Displacement of every kept point from where it was in the original.
    pub point_diff: f64,
    pub unchanged: bool,
}

/// One accepted improvement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceEntry {
    pub stage: usize,
    pub iteration: usize,
    pub eval: f64,
}

/// An optimized sketch with drawing instructions and metric deltas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ProposalRecord", try_from = "ProposalRecord")]
pub struct Proposal {
    pub method: String,
    pub label: Label,
    pub original: Sketch,
    pub optimized: Sketch,
    /// For each optimized point, the index of the original point it came from.
    pub origin: Vec<usize>,
    pub instructions: Vec<Instruction>,
    pub metrics: Metrics,
    pub trace: Vec<TraceEntry>,
}

impl Proposal {
    pub(crate) fn new(
        method: String,
        model: &ClassifierModel,
        label: Label,
        original: Sketch,
        optimized: Sketch,
        origin: Vec<usize>,
        trace: Vec<TraceEntry>,
    ) -> Self {
        let metrics = compute_metrics(model, label, &original, &optimized, &origin);
        let instructions = derive_instructions(&original, &optimized, &origin);
        Self {
            method,
            label,
            original,
            optimized,
            origin,
            instructions,
            metrics,
            trace,
        }
    }

    /// Metrics recomputed from the stored sketches.
    pub fn recompute_metrics(&self, model: &ClassifierModel) -> Metrics {
        compute_metrics(model, self.label, &self.original, &self.optimized, &self.origin)
    }

    pub fn is_unchanged(&self) -> bool {
        self.metrics.unchanged
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("proposal serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, OptimizeError> {
        serde_json::from_str(text).map_err(|e| OptimizeError::Format(e.to_string()))
    }
}

/// Summed displacement of each optimized point from its origin point.
pub fn origin_displacement(original: &Sketch, optimized: &Sketch, origin: &[usize]) -> f64 {
    let src = original.points();
    optimized
        .points()
        .iter()
        .zip(origin)
        .map(|(p, &o)| p.distance(&src[o]))
        .sum()
}

fn compute_metrics(
    model: &ClassifierModel,
    label: Label,
    original: &Sketch,
    optimized: &Sketch,
    origin: &[usize],
) -> Metrics {
    let before = model.forward(&encode(original));
    let after = model.forward(&encode(optimized));
    let predicted_before = model.predict(original);
    let predicted_after = model.predict(optimized);
    Metrics {
        predicted_before,
        predicted_after,
        confidence_before: before[label],
        confidence_after: after[label],
        correct_before: predicted_before == label,
        correct_after: predicted_after == label,
        classifier_loss_before: model.classifier_loss(original, label).expect("label checked"),
        classifier_loss_after: model.classifier_loss(optimized, label).expect("label checked"),
        effort_before: effort_loss(original),
        effort_after: effort_loss(optimized),
        length_diff: length_diff_loss(original, optimized),
        point_diff: origin_displacement(original, optimized, origin),
        unchanged: original.points() == optimized.points(),
    }
}

fn derive_instructions(original: &Sketch, optimized: &Sketch, origin: &[usize]) -> Vec<Instruction> {
    let source = original.strokes();
    optimized
        .strokes()
        .iter()
        .enumerate()
        .map(|(k, st)| {
            let first = origin[st.start];
            Instruction {
                stroke_index: source
                    .iter()
                    .position(|s| s.contains(first))
                    .expect("origin indexes the original"),
                draw_order: k + 1,
                reversed: origin[st.start + 1] < first,
            }
        })
        .collect()
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ProposalRecord {
    method: String,
    label: Label,
    original: CanonicalSketch,
    optimized: CanonicalSketch,
    origin: Vec<usize>,
    instructions: Vec<Instruction>,
    metrics: Metrics,
    trace: Vec<TraceEntry>,
}

impl From<Proposal> for ProposalRecord {
    fn from(p: Proposal) -> Self {
        Self {
            method: p.method,
            label: p.label,
            original: p.original.to_canonical(),
            optimized: p.optimized.to_canonical(),
            origin: p.origin,
            instructions: p.instructions,
            metrics: p.metrics,
            trace: p.trace,
        }
    }
}

impl TryFrom<ProposalRecord> for Proposal {
    type Error = SketchError;

    fn try_from(r: ProposalRecord) -> Result<Self, Self::Error> {
        let original = Sketch::try_from(&r.original)?;
        let optimized = Sketch::try_from(&r.optimized)?;
        if r.origin.len() != optimized.len() || r.origin.iter().any(|&o| o >= original.len()) {
            return Err(SketchError::ShapeMismatch(
                "origin map does not fit the sketches".into(),
            ));
        }
        Ok(Self {
            method: r.method,
            label: r.label,
            original,
            optimized,
            origin: r.origin,
            instructions: r.instructions,
            metrics: r.metrics,
            trace: r.trace,
        })
    }
}
