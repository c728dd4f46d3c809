//! Tokenization, corpus handling, and the supervised training loop.

mod corpus;
mod sweep;
pub mod synth;
mod train;
mod vocab;

pub use corpus::LabeledCorpus;
pub use sweep::{rf_sweep, SweepCell, SweepFactor, SweepReport};
pub use train::{
    evaluate, mean_loss, train, train_with_data, EpochMetrics, TrainConfig, TrainOutcome,
};
pub use vocab::{build_vocab, tokenize, Vocab, PAD_ID, UNK_ID};

use std::fmt;

use crate::attention::ModelError;

#[derive(Debug)]
pub enum TrainError {
    EmptyCorpus,
    BadLabel { line: usize, found: String },
    BadLine { line: usize },
    Io { path: String, source: std::io::Error },
    Config(String),
    DivergedLoss { epoch: usize },
    Model(ModelError),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyCorpus => write!(f, "corpus contains no examples"),
            TrainError::BadLabel { line, found } => {
                write!(f, "line {line}: label must be 0 or 1, found {found:?}")
            }
            TrainError::BadLine { line } => {
                write!(f, "line {line}: expected `label<TAB>text`")
            }
            TrainError::Io { path, source } => write!(f, "{path}: {source}"),
            TrainError::Config(msg) => write!(f, "invalid config: {msg}"),
            TrainError::DivergedLoss { epoch } => {
                write!(f, "loss became non-finite during epoch {epoch}")
            }
            TrainError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for TrainError {}

impl From<ModelError> for TrainError {
    fn from(e: ModelError) -> Self {
        TrainError::Model(e)
    }
}
