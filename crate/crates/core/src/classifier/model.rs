use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::net::{layout, Network};
use super::tensor::{encode, InputTensor, CANVAS_SIZE, CHANNELS, SEQ_LEN};
use super::ClassifierError;
use crate::sketch::Sketch;

/// Class label: an index into [`ClassifierModel::classes`].
pub type Label = usize;

/// Provenance recorded by training.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub train_samples: usize,
    pub heldout_samples: usize,
    pub train_accuracy: f64,
    pub heldout_accuracy: Option<f64>,
}

/// A trained (or freshly initialized) sequence classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierModel {
    pub(crate) net: Network,
    pub(crate) classes: Vec<String>,
    pub(crate) meta: TrainingMeta,
}

/// Loss, probabilities and exact input gradient for one sketch.
#[derive(Clone, Debug)]
pub struct LossGradient {
    pub loss: f64,
    pub probabilities: Vec<f64>,
    /// `d loss / d (x/255, y/255)` per tensor position; zero on padding.
    pub gradient: Vec<[f64; 2]>,
}

impl LossGradient {
    /// Gradient with respect to canvas coordinates of the first `n` points.
    pub fn canvas_gradient(&self, n: usize) -> Vec<[f64; 2]> {
        (0..n)
            .map(|i| match self.gradient.get(i) {
                Some(g) => [g[0] / CANVAS_SIZE, g[1] / CANVAS_SIZE],
                None => [0.0, 0.0],
            })
            .collect()
    }
}

/// Cross-entropy for a target label together with the predicted label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Assessment {
    pub loss: f64,
    pub predicted: Label,
}

impl Assessment {
    fn from_logits(logits: &[f64], y: Label) -> Self {
        Self {
            loss: cross_entropy(logits, y),
            predicted: argmax(&softmax(logits)),
        }
    }
}

impl ClassifierModel {
    /// Randomly initialized, untrained model.
    pub fn init(classes: Vec<String>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Network::init(classes.len(), &mut rng);
        Self {
            net,
            classes,
            meta: TrainingMeta {
                seed,
                ..TrainingMeta::default()
            },
        }
    }

    /// All weights zero: every input maps to the uniform distribution.
    pub fn constant(classes: Vec<String>) -> Self {
        Self {
            net: Network::zeros(classes.len()),
            classes,
            meta: TrainingMeta::default(),
        }
    }

    /// Zeroes the dense head, making the output uniform.
    pub fn with_zero_head(mut self) -> Self {
        let head = layout(self.classes.len())[3];
        let end = head.bias + head.cols;
        self.net.params[head.weight..end].iter_mut().for_each(|w| *w = 0.0);
        self
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_index(&self, name: &str) -> Option<Label> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }

    pub fn param_count(&self) -> usize {
        self.net.params.len()
    }

    fn check_label(&self, y: Label) -> Result<(), ClassifierError> {
        if y < self.classes.len() {
            Ok(())
        } else {
            Err(ClassifierError::InvalidLabel {
                label: y,
                classes: self.classes.len(),
            })
        }
    }

    pub fn logits(&self, t: &InputTensor) -> Vec<f64> {
        self.net.forward(t.as_slice(), 1).logits
    }

    /// Class probabilities for an encoded sketch.
    pub fn forward(&self, t: &InputTensor) -> Vec<f64> {
        softmax(&self.logits(t))
    }

    fn logits_batch(&self, tensors: &[InputTensor]) -> Vec<Vec<f64>> {
        const CHUNK: usize = 64;
        let k = self.num_classes();
        let mut out = Vec::with_capacity(tensors.len());
        for chunk in tensors.chunks(CHUNK) {
            let mut input = Vec::with_capacity(chunk.len() * SEQ_LEN * CHANNELS);
            for t in chunk {
                input.extend_from_slice(t.as_slice());
            }
            let logits = self.net.forward(&input, chunk.len()).logits;
            out.extend(logits.chunks_exact(k).map(<[f64]>::to_vec));
        }
        out
    }

    /// Probabilities for many tensors in one batched pass.
    pub fn forward_batch(&self, tensors: &[InputTensor]) -> Vec<Vec<f64>> {
        self.logits_batch(tensors).iter().map(|l| softmax(l)).collect()
    }

    /// Loss and prediction from a single forward pass. The prediction agrees
    /// with [`predict`](Self::predict) exactly.
    pub fn assess(&self, t: &InputTensor, y: Label) -> Result<Assessment, ClassifierError> {
        self.check_label(y)?;
        Ok(Assessment::from_logits(&self.logits(t), y))
    }

    pub fn assess_batch(&self, tensors: &[InputTensor], y: Label) -> Result<Vec<Assessment>, ClassifierError> {
        self.check_label(y)?;
        Ok(self
            .logits_batch(tensors)
            .iter()
            .map(|l| Assessment::from_logits(l, y))
            .collect())
    }

    pub fn probabilities(&self, s: &Sketch) -> Vec<f64> {
        self.forward(&encode(s))
    }

    /// Cross-entropy `-ln p_y`, computed from the log-softmax.
    pub fn classifier_loss(&self, s: &Sketch, y: Label) -> Result<f64, ClassifierError> {
        self.check_label(y)?;
        Ok(cross_entropy(&self.logits(&encode(s)), y))
    }

    pub fn tensor_loss(&self, t: &InputTensor, y: Label) -> Result<f64, ClassifierError> {
        self.check_label(y)?;
        Ok(cross_entropy(&self.logits(t), y))
    }

    /// Argmax of the probabilities; ties go to the lowest index.
    pub fn predict(&self, s: &Sketch) -> Label {
        argmax(&self.probabilities(s))
    }

    /// Exact gradient of the cross-entropy with respect to the normalized
    /// coordinate channels. Padding positions and the flag channel get 0.
    pub fn tensor_gradient(&self, t: &InputTensor, y: Label) -> Result<LossGradient, ClassifierError> {
        self.check_label(y)?;
        let trace = self.net.forward(t.as_slice(), 1);
        let probabilities = softmax(&trace.logits);
        let loss = cross_entropy(&trace.logits, y);
        let mut dlogits = probabilities.clone();
        dlogits[y] -= 1.0;
        let dinput = self
            .net
            .backward(&trace, &dlogits, None, true)
            .expect("input gradient requested");
        let occupied = t.occupied();
        let gradient = (0..SEQ_LEN)
            .map(|pos| {
                if pos < occupied {
                    [dinput[pos * CHANNELS], dinput[pos * CHANNELS + 1]]
                } else {
                    [0.0, 0.0]
                }
            })
            .collect();
        Ok(LossGradient {
            loss,
            probabilities,
            gradient,
        })
    }

    pub fn input_gradient(&self, s: &Sketch, y: Label) -> Result<LossGradient, ClassifierError> {
        self.tensor_gradient(&encode(s), y)
    }

    /// ReLU on/off pattern for an input. Two inputs with the same pattern
    /// lie in one linear region of the network; finite-difference checks use
    /// this to skip stencils that straddle a kink.
    pub fn activation_pattern(&self, t: &InputTensor) -> Vec<bool> {
        self.net.relu_pattern(t.as_slice())
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub(crate) fn cross_entropy(logits: &[f64], y: Label) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[y]
}

pub fn argmax(values: &[f64]) -> Label {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
