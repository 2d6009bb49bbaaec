//! Vocabulary and corpus preparation, Adadelta, and the training loop.

mod adadelta;
mod corpus;
pub mod text;
mod trainer;
mod vocab;

pub use adadelta::{adadelta_step, clip_global_norm, AdadeltaState, DEFAULT_EPS, DEFAULT_RHO};
pub use corpus::{encode_pair, PairCorpus};
pub use trainer::{
    loss_and_gradients, train, EpochLoss, TrainConfig, TrainOutcome, TrainState, Trainer,
    MODEL_FILE, STATE_FILE,
};
pub use vocab::{Vocab, BOS, EOS, UNK};

use thiserror::Error;

use crate::checkpoint::CheckpointError;
use crate::seq2seq::Seq2SeqError;

#[derive(Debug, Error)]
pub enum TrainingError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("vocabulary cap {0} leaves no room beyond the reserved tokens")]
    VocabTooSmall(usize),
    #[error("pair {0} has an empty side")]
    EmptySide(usize),
    #[error("line {0}: expected source<TAB>target")]
    MissingTab(usize),
    #[error("invalid optimizer setting: {0}")]
    InvalidHyperparameter(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("loss became non-finite in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] Seq2SeqError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}
