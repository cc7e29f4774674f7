//! One-dimensional convolutional classifier over fixed-length point
//! sequences, with exact input gradients for optimizing the drawing itself.

mod io;
mod model;
mod net;
mod tensor;
mod train;

use thiserror::Error;

pub use io::{load_model, model_from_bytes, model_to_bytes, save_model, ModelIoError};
pub use model::{argmax, softmax, Assessment, ClassifierModel, Label, LossGradient, TrainingMeta};
pub use tensor::{encode, InputTensor, CANVAS_SIZE, CHANNELS, SEQ_LEN};
pub use train::{train, train_with_progress, EpochStats, TrainConfig, TrainError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("label {label} out of range for {classes} classes")]
    InvalidLabel { label: Label, classes: usize },
}
