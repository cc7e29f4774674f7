//! Per-sample optimization: discrete edits (segment removal, stroke reversal
//! and reordering) and continuous point movement, both driven by the same
//! budgeted greedy acceptance loop.

mod config;
mod continuous;
mod discrete;
mod proposal;
mod search;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use config::{
    derive_seed, DescentConfig, LossWeights, Objective, OptimizationConfig, Strategy, LONG_RUN_ITERATIONS,
};
pub use continuous::{total_loss, total_loss_gradient};
pub use discrete::{
    both_candidate, budget_removal, permute_candidate, removal_candidate, reverse_candidate, RemovalOrder,
};
pub use proposal::{origin_displacement, Instruction, Metrics, Proposal, TraceEntry};

use crate::classifier::{ClassifierError, ClassifierModel, Label};
use crate::sketch::{Sketch, SketchError};
use search::{Families, Reference, Search};

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown method {0:?}")]
    UnknownMethod(String),
    #[error("unknown objective {0:?} (expected effort or accuracy)")]
    UnknownObjective(String),
    #[error("unknown loss weights {0:?} (expected a preset name or three comma-separated numbers)")]
    UnknownWeights(String),
    #[error("invalid proposal document: {0}")]
    Format(String),
}

/// One optimization step of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Discrete(Strategy),
    Continuous(LossWeights),
}

impl Method {
    pub fn code(&self) -> &'static str {
        match self {
            Method::Discrete(s) => s.code(),
            Method::Continuous(_) => "C",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Discrete(s) => f.write_str(s.name()),
            Method::Continuous(w) => write!(f, "continuous({w})"),
        }
    }
}

/// A method with an optional iteration budget overriding the defaults
/// (`iterations` for discrete stages, descent `steps` for continuous ones).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stage {
    pub method: Method,
    pub iterations: Option<usize>,
}

impl From<Method> for Stage {
    fn from(method: Method) -> Self {
        Stage {
            method,
            iterations: None,
        }
    }
}

/// Runs `stages` in order. Each stage starts from the previous stage's best
/// sketch; distortion is always measured against `x`, with every distortion
/// measure used by any stage bounding every stage.
pub(crate) fn run_stages(
    x: &Sketch,
    y: Label,
    model: &ClassifierModel,
    stages: &[Stage],
    cfg: &OptimizationConfig,
    dcfg: &DescentConfig,
    method: String,
) -> Result<Proposal, OptimizeError> {
    cfg.validate()?;
    dcfg.validate()?;
    if y >= model.num_classes() {
        return Err(ClassifierError::InvalidLabel {
            label: y,
            classes: model.num_classes(),
        }
        .into());
    }
    let mut families = Families::default();
    for st in stages {
        match st.method {
            Method::Discrete(_) => families.length = true,
            Method::Continuous(w) => {
                w.validate()?;
                families.points = true
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let reference = Reference::new(x, cfg.max_distortion, families);
    let mut search = Search::new(model, y, cfg.objective, reference);
    for (k, st) in stages.iter().enumerate() {
        search.stage = k;
        match st.method {
            Method::Discrete(strategy) => {
                discrete::run_discrete(&mut search, strategy, st.iterations.unwrap_or(cfg.iterations), &mut rng)
            }
            Method::Continuous(w) => {
                continuous::run_continuous(&mut search, &w, dcfg, st.iterations.unwrap_or(dcfg.steps))
            }
        }
    }
    let best = search.best;
    Ok(Proposal::new(
        method,
        model,
        y,
        x.clone(),
        best.sketch,
        best.origin,
        search.trace,
    ))
}

/// Discrete optimization of one sketch with one strategy.
///
/// Returns `x` unchanged when no candidate passes the acceptance test.
pub fn optimize(
    x: &Sketch,
    y: Label,
    model: &ClassifierModel,
    cfg: &OptimizationConfig,
    strategy: Strategy,
) -> Result<Proposal, OptimizeError> {
    run_stages(
        x,
        y,
        model,
        &[Method::Discrete(strategy).into()],
        cfg,
        &DescentConfig::default(),
        strategy.code().to_string(),
    )
}

/// Continuous point movement minimizing the weighted total loss.
pub fn optimize_continuous(
    x: &Sketch,
    y: Label,
    model: &ClassifierModel,
    w: &LossWeights,
    cfg: &OptimizationConfig,
    dcfg: &DescentConfig,
) -> Result<Proposal, OptimizeError> {
    run_stages(
        x,
        y,
        model,
        &[Method::Continuous(*w).into()],
        cfg,
        dcfg,
        continuous_label(w, dcfg),
    )
}

pub(crate) fn continuous_label(w: &LossWeights, dcfg: &DescentConfig) -> String {
    format!("C(beta={w};step={};steps={})", dcfg.step_size, dcfg.steps)
}
