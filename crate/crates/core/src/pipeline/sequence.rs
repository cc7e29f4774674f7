use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::classifier::{ClassifierModel, Label};
use crate::optimize::{
    derive_seed, DescentConfig, LossWeights, Method, OptimizationConfig, OptimizeError, Proposal, Stage, Strategy,
};
use crate::sketch::Sketch;

/// An ordered list of optimization stages, e.g. `D-B` or `B:100-C:250`.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodSequence {
    stages: Vec<Stage>,
    name: String,
}

impl MethodSequence {
    pub fn new(stages: Vec<Stage>) -> Result<Self, OptimizeError> {
        if stages.is_empty() {
            return Err(OptimizeError::Config("method sequence is empty".into()));
        }
        let name = stages
            .iter()
            .map(|st| match st.iterations {
                Some(n) => format!("{}:{n}", st.method.code()),
                None => st.method.code().to_string(),
            })
            .collect::<Vec<_>>()
            .join("-");
        Ok(Self { stages, name })
    }

    pub fn single(method: Method) -> Self {
        Self::new(vec![method.into()]).expect("one stage")
    }

    /// Parses stage codes separated by `,` or `-`. Codes: `D` (deletion,
    /// which uses CE ordering), `B`, `P`, `R`, `C` (continuous with
    /// `weights`), `CL`, `CE`, `RA`, `RO`, `SO` or full strategy names.
    /// A `:N` suffix sets that stage's iteration budget.
    pub fn parse(text: &str, weights: LossWeights) -> Result<Self, OptimizeError> {
        let mut stages = Vec::new();
        let mut names = Vec::new();
        for token in text.split([',', ' ']).flat_map(split_dashes).filter(|t| !t.is_empty()) {
            let (code, iterations) = match token.split_once(':') {
                Some((c, n)) => {
                    let n: usize = n
                        .parse()
                        .ok()
                        .filter(|&n| n > 0)
                        .ok_or_else(|| OptimizeError::Config(format!("bad iteration budget in {token:?}")))?;
                    (c, Some(n))
                }
                None => (token, None),
            };
            let method = match code.to_ascii_uppercase().as_str() {
                "D" => Method::Discrete(Strategy::RemovalCE),
                "C" | "CONTINUOUS" => Method::Continuous(weights),
                _ => Method::Discrete(code.parse()?),
            };
            stages.push(Stage { method, iterations });
            names.push(match method {
                Method::Discrete(s) if !code.eq_ignore_ascii_case("D") => {
                    token.replacen(code, s.code(), 1)
                }
                _ => token.to_ascii_uppercase(),
            });
        }
        let mut seq = Self::new(stages)?;
        seq.name = names.join("-");
        Ok(seq)
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Method label recorded in proposals; continuous stages carry their
    /// weights and descent settings.
    pub fn label(&self, dcfg: &DescentConfig) -> String {
        match &self.stages[..] {
            [Stage {
                method: Method::Continuous(w),
                iterations,
            }] => {
                let d = DescentConfig {
                    steps: iterations.unwrap_or(dcfg.steps),
                    ..*dcfg
                };
                crate::optimize::continuous_label(w, &d)
            }
            _ => self.name.clone(),
        }
    }
}

/// Splits on `-` but keeps full strategy names such as `removal-cl` whole.
fn split_dashes(text: &str) -> Vec<&str> {
    let lower = text.to_ascii_lowercase();
    if Strategy::ALL.iter().any(|s| lower.starts_with(s.name())) || lower == "continuous" {
        return vec![text];
    }
    text.split('-').collect()
}

impl fmt::Display for MethodSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for MethodSequence {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s, LossWeights::default())
    }
}

/// Runs every stage of `seq` on `x`. The original `x` stays the distortion
/// reference throughout.
pub fn run_sequence(
    x: &Sketch,
    y: Label,
    model: &ClassifierModel,
    seq: &MethodSequence,
    cfg: &OptimizationConfig,
    dcfg: &DescentConfig,
) -> Result<Proposal, OptimizeError> {
    crate::optimize::run_stages(x, y, model, &seq.stages, cfg, dcfg, seq.label(dcfg))
}

/// Optimizes every sample, in parallel on the current rayon pool. Sample `i`
/// uses seed `derive_seed(cfg.seed, i)`; output order is input order.
pub fn optimize_batch(
    samples: &[(Sketch, Label)],
    model: &ClassifierModel,
    seq: &MethodSequence,
    cfg: &OptimizationConfig,
    dcfg: &DescentConfig,
) -> Result<Vec<Proposal>, OptimizeError> {
    samples
        .par_iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let cfg = OptimizationConfig {
                seed: derive_seed(cfg.seed, i as u64),
                ..cfg.clone()
            };
            run_sequence(x, *y, model, seq, &cfg, dcfg)
        })
        .collect()
}
