//! Method sequencing and the evaluation protocol.

mod evaluate;
mod sequence;

pub use evaluate::{
    evaluate_accuracy, evaluate_noisy_accuracy, evaluate_report, EvalError, MeanStd, MetricsReport, MetricsRow,
    NoisyAccuracy, ReportConfig,
};
pub use sequence::{optimize_batch, run_sequence, MethodSequence};
