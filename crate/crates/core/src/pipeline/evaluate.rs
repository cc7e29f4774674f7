use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{argmax, encode, ClassifierModel, InputTensor, Label};
use crate::optimize::{derive_seed, Proposal};
use crate::sketch::{add_noise, effort_loss, Sketch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no samples to evaluate")]
    Empty,
    #[error("proposal {0} does not belong to the original sample at the same position")]
    Misaligned(usize),
    #[error("{0} originals but {1} proposals")]
    CountMismatch(usize, usize),
    #[error("noise replicas must be at least 1")]
    NoReplicas,
    #[error("noise radius must be finite and >= 0, got {0}")]
    Radius(f64),
}

/// Fraction of samples whose prediction equals the label.
pub fn evaluate_accuracy(model: &ClassifierModel, samples: &[(Sketch, Label)]) -> Result<f64, EvalError> {
    if samples.is_empty() {
        return Err(EvalError::Empty);
    }
    let correct = samples
        .par_iter()
        .filter(|(s, y)| model.predict(s) == *y)
        .count();
    Ok(correct as f64 / samples.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyAccuracy {
    pub accuracy: f64,
    pub correct: usize,
    pub evaluations: usize,
}

/// Accuracy over `replicas` jittered copies of every sample (originals are
/// not counted). Replica `j` of sample `i` uses noise seed
/// `derive_seed(derive_seed(seed, i), j)`.
pub fn evaluate_noisy_accuracy(
    model: &ClassifierModel,
    samples: &[(Sketch, Label)],
    r: f64,
    replicas: usize,
    seed: u64,
) -> Result<NoisyAccuracy, EvalError> {
    if replicas == 0 {
        return Err(EvalError::NoReplicas);
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(EvalError::Radius(r));
    }
    if samples.is_empty() {
        return Err(EvalError::Empty);
    }
    let (correct, evaluations) = samples
        .par_iter()
        .enumerate()
        .map(|(i, (s, y))| {
            let base = derive_seed(seed, i as u64);
            let tensors: Vec<InputTensor> = (0..replicas)
                .map(|j| encode(&add_noise(s, r, derive_seed(base, j as u64))))
                .collect();
            let probs = model.forward_batch(&tensors);
            let correct = probs.iter().filter(|p| argmax(p) == *y).count();
            (correct, probs.len())
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(NoisyAccuracy {
        accuracy: correct as f64 / evaluations as f64,
        correct,
        evaluations,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    /// Summed in input order, so the result is reproducible.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsRow {
    pub method: String,
    pub samples: usize,
    pub acc: f64,
    pub acc_noisy: f64,
    pub effort: MeanStd,
    pub length_diff: MeanStd,
    pub point_diff: MeanStd,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportConfig {
    pub noise_radius: f64,
    pub noise_replicas: usize,
    pub seed: u64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            noise_radius: 10.0,
            noise_replicas: 10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsReport {
    pub config: ReportConfig,
    pub rows: Vec<MetricsRow>,
}

fn row(
    model: &ClassifierModel,
    method: &str,
    samples: &[(Sketch, Label)],
    length_diff: &[f64],
    point_diff: &[f64],
    cfg: &ReportConfig,
) -> Result<MetricsRow, EvalError> {
    let effort: Vec<f64> = samples.iter().map(|(s, _)| effort_loss(s)).collect();
    Ok(MetricsRow {
        method: method.to_string(),
        samples: samples.len(),
        acc: evaluate_accuracy(model, samples)?,
        acc_noisy: evaluate_noisy_accuracy(model, samples, cfg.noise_radius, cfg.noise_replicas, cfg.seed)?.accuracy,
        effort: MeanStd::of(&effort),
        length_diff: MeanStd::of(length_diff),
        point_diff: MeanStd::of(point_diff),
    })
}

/// Report with an `Original` row for `originals` and one row for the
/// proposals. Proposal `i` must have been made from original `i`.
pub fn evaluate_report(
    model: &ClassifierModel,
    originals: &[(Sketch, Label)],
    proposals: &[Proposal],
    cfg: &ReportConfig,
) -> Result<MetricsReport, EvalError> {
    if originals.len() != proposals.len() {
        return Err(EvalError::CountMismatch(originals.len(), proposals.len()));
    }
    if let Some(i) = originals
        .iter()
        .zip(proposals)
        .position(|((x, y), p)| p.label != *y || p.original.points() != x.points())
    {
        return Err(EvalError::Misaligned(i));
    }
    let mut report = MetricsReport::original(model, originals, cfg)?;
    report.push_proposals(model, proposals)?;
    Ok(report)
}

impl MetricsReport {
    /// Report holding only the `Original` row.
    pub fn original(model: &ClassifierModel, originals: &[(Sketch, Label)], cfg: &ReportConfig) -> Result<Self, EvalError> {
        let zeros = vec![0.0; originals.len()];
        Ok(Self {
            config: *cfg,
            rows: vec![row(model, "Original", originals, &zeros, &zeros, cfg)?],
        })
    }

    /// Appends a row for another set of proposals of the same originals.
    pub fn push_proposals(&mut self, model: &ClassifierModel, proposals: &[Proposal]) -> Result<(), EvalError> {
        let method = proposals.first().ok_or(EvalError::Empty)?.method.clone();
        let optimized: Vec<(Sketch, Label)> = proposals.iter().map(|p| (p.optimized.clone(), p.label)).collect();
        let ld: Vec<f64> = proposals.iter().map(|p| p.metrics.length_diff).collect();
        let lp: Vec<f64> = proposals.iter().map(|p| p.metrics.point_diff).collect();
        self.rows.push(row(model, &method, &optimized, &ld, &lp, &self.config)?);
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let header = ["Method", "n", "Acc", "Acc_Noi", "L_E", "L_D", "L_P"];
        let ms = |m: &MeanStd| format!("{:.1} ± {:.1}", m.mean, m.std);
        let cells: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.method.clone(),
                    r.samples.to_string(),
                    format!("{:.3}", r.acc),
                    format!("{:.3}", r.acc_noisy),
                    ms(&r.effort),
                    ms(&r.length_diff),
                    ms(&r.point_diff),
                ]
            })
            .collect();
        let mut widths = header.map(|h| h.chars().count());
        for c in &cells {
            for (w, v) in widths.iter_mut().zip(c) {
                *w = (*w).max(v.chars().count());
            }
        }
        let mut out = String::new();
        let mut line = |vals: Vec<&str>| {
            let parts: Vec<String> = vals
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(k, (v, w))| {
                    let pad = " ".repeat(w - v.chars().count());
                    if k == 0 {
                        format!("{v}{pad}")
                    } else {
                        format!("{pad}{v}")
                    }
                })
                .collect();
            writeln!(out, "{}", parts.join("  ").trim_end()).unwrap();
        };
        line(header.to_vec());
        for c in &cells {
            line(c.iter().map(String::as_str).collect());
        }
        out
    }
}
