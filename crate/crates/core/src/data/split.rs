use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classifier::Label;
use crate::sketch::Sketch;

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit {
    pub classes: Vec<String>,
    pub seed: u64,
    /// Indices into the input sample list, ascending.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub train: Vec<(Sketch, Label)>,
    pub test: Vec<(Sketch, Label)>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplitError {
    #[error("class {class:?} has {count} sample(s); at least 2 are required")]
    TooFewSamples { class: String, count: usize },
    #[error("train fraction {0} outside [0, 1]")]
    Fraction(f64),
    #[error("label {0} has no class name")]
    UnknownLabel(Label),
    #[error("malformed split manifest: {0}")]
    Manifest(String),
}

/// Stratified split: within each class, `round(n * train_fraction)` samples
/// go to training, the rest to test. Deterministic in `seed`.
pub fn split_dataset(
    samples: &[(Sketch, Label)],
    classes: &[String],
    train_fraction: f64,
    seed: u64,
) -> Result<DatasetSplit, SplitError> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(SplitError::Fraction(train_fraction));
    }
    if let Some(&(_, y)) = samples.iter().find(|(_, y)| *y >= classes.len()) {
        return Err(SplitError::UnknownLabel(y));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_indices = Vec::new();
    let mut test_indices = Vec::new();
    for (class, name) in classes.iter().enumerate() {
        let mut idx: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].1 == class).collect();
        if idx.len() < 2 {
            return Err(SplitError::TooFewSamples {
                class: name.clone(),
                count: idx.len(),
            });
        }
        idx.shuffle(&mut rng);
        let n_train = (idx.len() as f64 * train_fraction).round() as usize;
        train_indices.extend_from_slice(&idx[..n_train]);
        test_indices.extend_from_slice(&idx[n_train..]);
    }
    train_indices.sort_unstable();
    test_indices.sort_unstable();
    Ok(DatasetSplit {
        classes: classes.to_vec(),
        seed,
        train: train_indices.iter().map(|&i| samples[i].clone()).collect(),
        test: test_indices.iter().map(|&i| samples[i].clone()).collect(),
        train_indices,
        test_indices,
    })
}

impl DatasetSplit {
    /// Text manifest: a `seed` line, then `train` and `test` lines listing
    /// sample indices separated by spaces.
    pub fn manifest(&self) -> String {
        let mut out = format!("seed {}\n", self.seed);
        for (name, idx) in [("train", &self.train_indices), ("test", &self.test_indices)] {
            out.push_str(name);
            for i in idx {
                write!(out, " {i}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Parses a manifest into `(train_indices, test_indices)`.
pub fn parse_manifest(text: &str) -> Result<(Vec<usize>, Vec<usize>), SplitError> {
    let mut train = None;
    let mut test = None;
    for line in text.lines() {
        let mut words = line.split_whitespace();
        let slot = match words.next() {
            Some("train") => &mut train,
            Some("test") => &mut test,
            Some("seed") | None => continue,
            Some(other) => return Err(SplitError::Manifest(format!("unknown section {other:?}"))),
        };
        let idx = words
            .map(|w| w.parse::<usize>().map_err(|e| SplitError::Manifest(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        *slot = Some(idx);
    }
    match (train, test) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(SplitError::Manifest("missing train or test section".into())),
    }
}
