use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::OptimizeError;

/// Iteration count for long offline runs.
pub const LONG_RUN_ITERATIONS: usize = 20_000;

/// What an accepted candidate must improve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Drawing effort: total pen travel.
    Time,
    /// Classifier cross-entropy for the target label.
    Accuracy,
}

impl FromStr for Objective {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "time" | "effort" | "eff" => Ok(Objective::Time),
            "accuracy" | "acc" => Ok(Objective::Accuracy),
            _ => Err(OptimizeError::UnknownObjective(s.to_string())),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Time => "effort",
            Objective::Accuracy => "accuracy",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OptimizationConfig {
    pub objective: Objective,
    /// Distortion budget as a fraction of the original visible length.
    pub max_distortion: f64,
    pub iterations: usize,
    pub seed: u64,
    pub noise_radius: f64,
    pub noise_replicas: usize,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            objective: Objective::Accuracy,
            max_distortion: 0.2,
            iterations: 500,
            seed: 0,
            noise_radius: 10.0,
            noise_replicas: 10,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        if !(self.max_distortion >= 0.0 && self.max_distortion.is_finite()) {
            return Err(OptimizeError::Config(format!(
                "distortion budget must be a finite value >= 0, got {}",
                self.max_distortion
            )));
        }
        if self.iterations == 0 {
            return Err(OptimizeError::Config("iteration count must be at least 1".into()));
        }
        if !(self.noise_radius >= 0.0 && self.noise_radius.is_finite()) {
            return Err(OptimizeError::Config(format!(
                "noise radius must be a finite value >= 0, got {}",
                self.noise_radius
            )));
        }
        if self.noise_replicas == 0 {
            return Err(OptimizeError::Config("noise replicas must be at least 1".into()));
        }
        Ok(())
    }
}

/// Candidate generator for the discrete search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Remove the segment whose removal gives the lowest classifier loss.
    RemovalCL,
    /// As `RemovalCL`, restricted to segments at a stroke end.
    RemovalCE,
    /// Remove a uniformly random segment.
    RemovalRA,
    /// Remove the most recently drawn remaining segment.
    RemovalRO,
    /// Remove the earliest drawn remaining segment.
    RemovalSO,
    Reverse,
    Permute,
    /// Permute, flipping each moved stroke with probability 1/2.
    Both,
}

impl Strategy {
    pub const ALL: [Strategy; 8] = [
        Strategy::RemovalCL,
        Strategy::RemovalCE,
        Strategy::RemovalRA,
        Strategy::RemovalRO,
        Strategy::RemovalSO,
        Strategy::Reverse,
        Strategy::Permute,
        Strategy::Both,
    ];

    pub fn is_removal(self) -> bool {
        matches!(
            self,
            Strategy::RemovalCL | Strategy::RemovalCE | Strategy::RemovalRA | Strategy::RemovalRO | Strategy::RemovalSO
        )
    }

    /// Command-line name, e.g. `removal-cl`.
    pub fn name(self) -> &'static str {
        match self {
            Strategy::RemovalCL => "removal-cl",
            Strategy::RemovalCE => "removal-ce",
            Strategy::RemovalRA => "removal-ra",
            Strategy::RemovalRO => "removal-ro",
            Strategy::RemovalSO => "removal-so",
            Strategy::Reverse => "reverse",
            Strategy::Permute => "permute",
            Strategy::Both => "both",
        }
    }

    /// Short code used in reports and sequences, e.g. `CL` or `B`.
    pub fn code(self) -> &'static str {
        match self {
            Strategy::RemovalCL => "CL",
            Strategy::RemovalCE => "CE",
            Strategy::RemovalRA => "RA",
            Strategy::RemovalRO => "RO",
            Strategy::RemovalSO => "SO",
            Strategy::Reverse => "R",
            Strategy::Permute => "P",
            Strategy::Both => "B",
        }
    }
}

impl FromStr for Strategy {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == lower || st.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| OptimizeError::UnknownMethod(s.to_string()))
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Weights of the classifier, point-displacement and effort terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LossWeights {
    pub beta_c: f64,
    pub beta_p: f64,
    pub beta_e: f64,
}

impl LossWeights {
    pub const PRESETS: [(&'static str, LossWeights); 4] = [
        ("classifier", LossWeights::new(1.0, 0.0, 0.0)),
        ("effort", LossWeights::new(0.0, 0.0, 1.0)),
        ("classifier-effort", LossWeights::new(0.9999, 0.0, 0.0001)),
        ("acc-best", LossWeights::new(0.9998, 0.0001, 0.0001)),
    ];

    pub const fn new(beta_c: f64, beta_p: f64, beta_e: f64) -> Self {
        Self { beta_c, beta_p, beta_e }
    }

    pub fn preset(name: &str) -> Option<Self> {
        Self::PRESETS.iter().find(|(n, _)| *n == name).map(|&(_, w)| w)
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        let all = [self.beta_c, self.beta_p, self.beta_e];
        if all.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(OptimizeError::Config(format!("loss weights must be finite and >= 0, got {self}")));
        }
        if all.iter().all(|&b| b == 0.0) {
            return Err(OptimizeError::Config("loss weights are all zero".into()));
        }
        Ok(())
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self::preset("acc-best").expect("preset exists")
    }
}

impl fmt::Display for LossWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.beta_c, self.beta_p, self.beta_e)
    }
}

/// Accepts a preset name or three comma-separated weights.
impl FromStr for LossWeights {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(w) = Self::preset(s) {
            return Ok(w);
        }
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| OptimizeError::UnknownWeights(s.to_string()))?;
        let [c, p, e] = parts[..] else {
            return Err(OptimizeError::UnknownWeights(s.to_string()));
        };
        let w = LossWeights::new(c, p, e);
        w.validate()?;
        Ok(w)
    }
}

/// Fixed-step descent settings for continuous point movement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DescentConfig {
    /// Largest per-point move per step, in canvas units.
    pub step_size: f64,
    pub steps: usize,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            step_size: 0.5,
            steps: 1000,
        }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(OptimizeError::Config(format!("step size must be > 0, got {}", self.step_size)));
        }
        if self.steps == 0 {
            return Err(OptimizeError::Config("descent needs at least one step".into()));
        }
        Ok(())
    }
}

/// Independent per-item seed derived from a base seed (SplitMix64 mixing).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
