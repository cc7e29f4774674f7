//! The shared acceptance loop: a best-so-far sketch that is replaced only by
//! candidates that stay within the distortion budget, keep (or reach) the
//! target label, and strictly improve the objective.

use crate::classifier::{encode, Assessment, ClassifierModel, Label};
use crate::sketch::{effort_loss, visible_length, Rewrite, Sketch};

use super::config::Objective;
use super::proposal::TraceEntry;

/// A sketch plus, for every point, the index of its source point in the
/// original sketch.
#[derive(Clone, Debug)]
pub(crate) struct Tracked {
    pub sketch: Sketch,
    pub origin: Vec<usize>,
}

impl Tracked {
    pub fn new(s: &Sketch) -> Self {
        Self {
            sketch: s.clone(),
            origin: (0..s.len()).collect(),
        }
    }

    pub fn rewrite(&self, rw: &Rewrite) -> Self {
        Self {
            sketch: rw.apply(&self.sketch),
            origin: rw.apply_tags(&self.origin),
        }
    }

    pub fn with_coordinates(&self, coords: &[[f64; 2]]) -> Self {
        Self {
            sketch: self.sketch.with_coordinates(coords),
            origin: self.origin.clone(),
        }
    }
}

/// Which distortion measures bound a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Families {
    /// Visible-length difference.
    pub length: bool,
    /// Displacement of kept points.
    pub points: bool,
}

/// The original sketch and the budget every candidate is measured against.
pub(crate) struct Reference<'a> {
    pub original: &'a Sketch,
    visible: f64,
    budget: f64,
    families: Families,
}

impl<'a> Reference<'a> {
    pub fn new(original: &'a Sketch, max_distortion: f64, families: Families) -> Self {
        let visible = visible_length(original);
        Self {
            original,
            visible,
            budget: max_distortion * visible,
            families,
        }
    }

    pub fn within_budget(&self, z: &Tracked) -> bool {
        if self.families.length && !((self.visible - visible_length(&z.sketch)).abs() < self.budget) {
            return false;
        }
        if self.families.points {
            let src = self.original.points();
            let moved: f64 = z
                .sketch
                .points()
                .iter()
                .zip(&z.origin)
                .map(|(p, &o)| p.distance(&src[o]))
                .sum();
            if !(moved < self.budget) {
                return false;
            }
        }
        true
    }

    /// Original coordinates of each point of `z`, in `z`'s order.
    pub fn anchors(&self, z: &Tracked) -> Vec<[f64; 2]> {
        let src = self.original.points();
        z.origin.iter().map(|&o| [src[o].x, src[o].y]).collect()
    }
}

pub(crate) struct Search<'a> {
    pub model: &'a ClassifierModel,
    pub label: Label,
    pub objective: Objective,
    pub reference: Reference<'a>,
    pub best: Tracked,
    best_eval: f64,
    best_correct: bool,
    pub stage: usize,
    pub trace: Vec<TraceEntry>,
}

impl<'a> Search<'a> {
    pub fn new(
        model: &'a ClassifierModel,
        label: Label,
        objective: Objective,
        reference: Reference<'a>,
    ) -> Self {
        let best = Tracked::new(reference.original);
        let a = model
            .assess(&encode(&best.sketch), label)
            .expect("label validated by caller");
        let best_eval = match objective {
            Objective::Time => effort_loss(&best.sketch),
            Objective::Accuracy => a.loss,
        };
        Self {
            model,
            label,
            objective,
            reference,
            best,
            best_eval,
            best_correct: a.predicted == label,
            stage: 0,
            trace: Vec::new(),
        }
    }

    pub fn assess(&self, s: &Sketch) -> Assessment {
        self.model.assess(&encode(s), self.label).expect("label validated")
    }

    /// Applies the acceptance test; on success `z` becomes the best solution.
    /// `known` may carry an already computed assessment of `z`.
    pub fn consider(&mut self, z: Tracked, known: Option<Assessment>, iteration: usize) -> bool {
        if !self.reference.within_budget(&z) {
            return false;
        }
        // Effort is cheap, so reject on it before running the classifier.
        let effort = match self.objective {
            Objective::Time => {
                let e = effort_loss(&z.sketch);
                if !(e < self.best_eval) {
                    return false;
                }
                Some(e)
            }
            Objective::Accuracy => None,
        };
        let a = known.unwrap_or_else(|| self.assess(&z.sketch));
        let correct = a.predicted == self.label;
        if !(correct || !self.best_correct) {
            return false;
        }
        let eval = effort.unwrap_or(a.loss);
        if !(eval < self.best_eval) {
            return false;
        }
        self.best = z;
        self.best_eval = eval;
        self.best_correct = correct;
        self.trace.push(TraceEntry {
            stage: self.stage,
            iteration,
            eval,
        });
        true
    }
}
