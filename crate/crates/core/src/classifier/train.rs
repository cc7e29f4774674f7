use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{argmax, cross_entropy, softmax, ClassifierModel, Label, TrainingMeta};
use super::net::Network;
use super::tensor::{encode, InputTensor, CHANNELS, SEQ_LEN};
use crate::sketch::Sketch;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Multiplies the learning rate after every epoch.
    pub lr_decay: f64,
    pub seed: u64,
    /// Share of each class held out to measure accuracy.
    pub holdout_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 64,
            learning_rate: 1e-3,
            lr_decay: 0.9,
            seed: 0,
            holdout_fraction: 0.1,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("training data is empty")]
    Empty,
    #[error("training data needs at least 2 classes, found {0}")]
    SingleClass(usize),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: Label, classes: usize },
    #[error("invalid training config: {0}")]
    Config(&'static str),
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be positive"));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch size must be positive"));
        }
        if !(self.learning_rate > 0.0) || !(self.lr_decay > 0.0) {
            return Err(TrainError::Config("learning rate and decay must be positive"));
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return Err(TrainError::Config("holdout fraction must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Per-epoch progress passed to [`train_with_progress`].
#[derive(Clone, Copy, Debug)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
}

pub fn train(samples: &[(Sketch, Label)], classes: &[String], cfg: &TrainConfig) -> Result<ClassifierModel, TrainError> {
    train_with_progress(samples, classes, cfg, |_| {})
}

/// Mini-batch Adam on the mean cross-entropy. Deterministic in `cfg.seed`.
pub fn train_with_progress(
    samples: &[(Sketch, Label)],
    classes: &[String],
    cfg: &TrainConfig,
    mut progress: impl FnMut(EpochStats),
) -> Result<ClassifierModel, TrainError> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(TrainError::Empty);
    }
    let k = classes.len();
    let mut seen = vec![false; k];
    for &(_, y) in samples {
        if y >= k {
            return Err(TrainError::LabelOutOfRange { label: y, classes: k });
        }
        seen[y] = true;
    }
    let present = seen.iter().filter(|&&s| s).count();
    if k < 2 || present < 2 {
        return Err(TrainError::SingleClass(present));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (train_idx, holdout_idx) = stratified_holdout(samples, k, cfg.holdout_fraction, &mut rng);
    let tensors: Vec<InputTensor> = samples.iter().map(|(s, _)| encode(s)).collect();

    let mut net = Network::init(k, &mut rng);
    let mut adam = Adam::new(net.params.len());
    let mut order = train_idx.clone();
    let mut lr = cfg.learning_rate;
    let mut grad = vec![0.0; net.params.len()];
    let mut input = Vec::with_capacity(cfg.batch_size * SEQ_LEN * CHANNELS);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            input.clear();
            for &i in batch {
                input.extend_from_slice(tensors[i].as_slice());
            }
            let trace = net.forward(&input, batch.len());
            let scale = 1.0 / batch.len() as f64;
            let mut dlogits = Vec::with_capacity(batch.len() * k);
            for (row, &i) in trace.logits.chunks_exact(k).zip(batch) {
                let y = samples[i].1;
                loss_sum += cross_entropy(row, y);
                if argmax(row) == y {
                    correct += 1;
                }
                let mut p = softmax(row);
                p[y] -= 1.0;
                dlogits.extend(p.into_iter().map(|v| v * scale));
            }
            grad.iter_mut().for_each(|g| *g = 0.0);
            net.backward(&trace, &dlogits, Some(&mut grad), false);
            adam.step(&mut net.params, &grad, lr);
        }
        lr *= cfg.lr_decay;
        progress(EpochStats {
            epoch,
            mean_loss: loss_sum / order.len().max(1) as f64,
            train_accuracy: correct as f64 / order.len().max(1) as f64,
        });
    }

    let mut model = ClassifierModel {
        net,
        classes: classes.to_vec(),
        meta: TrainingMeta::default(),
    };
    let train_accuracy = accuracy_on(&model, &tensors, samples, &train_idx);
    let heldout_accuracy = (!holdout_idx.is_empty()).then(|| accuracy_on(&model, &tensors, samples, &holdout_idx));
    model.meta = TrainingMeta {
        seed: cfg.seed,
        epochs: cfg.epochs,
        train_samples: train_idx.len(),
        heldout_samples: holdout_idx.len(),
        train_accuracy,
        heldout_accuracy,
    };
    Ok(model)
}

fn accuracy_on(model: &ClassifierModel, tensors: &[InputTensor], samples: &[(Sketch, Label)], idx: &[usize]) -> f64 {
    let batch: Vec<InputTensor> = idx.iter().map(|&i| tensors[i].clone()).collect();
    let probs = model.forward_batch(&batch);
    let correct = probs
        .iter()
        .zip(idx)
        .filter(|(p, &i)| argmax(p) == samples[i].1)
        .count();
    correct as f64 / idx.len() as f64
}

fn stratified_holdout(
    samples: &[(Sketch, Label)],
    k: usize,
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut holdout = Vec::new();
    for class in 0..k {
        let mut idx: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].1 == class).collect();
        idx.shuffle(rng);
        let n_hold = ((idx.len() as f64 * fraction).floor() as usize).min(idx.len().saturating_sub(1));
        holdout.extend_from_slice(&idx[..n_hold]);
        train.extend_from_slice(&idx[n_hold..]);
    }
    train.sort_unstable();
    holdout.sort_unstable();
    (train, holdout)
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}
