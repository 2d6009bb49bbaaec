//! Attention encoder-decoder: stacked bidirectional LSTM encoder, stacked LSTM
//! decoder, one of four attention score functions, softmax projection.

mod config;
mod model;
mod params;

pub use config::{Attention, ModelConfig, DEFAULT_TENSOR_SLICES};
pub use model::{lstm_step, BoundModel, DecoderState, EncoderOutput, LstmVars};
pub use params::{parameter_count, AttentionIds, Layout, LstmIds, ModelParams, NamedTensor};

use thiserror::Error;

use crate::numerics::NumericsError;

pub const UNK_ID: usize = 0;
pub const EOS_ID: usize = 1;
pub const BOS_ID: usize = 2;
pub const RESERVED_TOKENS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Seq2SeqError {
    #[error("source sequence is empty")]
    EmptySource,
    #[error("target sequence is empty")]
    EmptyTarget,
    #[error("token id {id} out of range for vocabulary of {vocab}")]
    TokenOutOfRange { id: usize, vocab: usize },
    #[error("attention requested on a model without attention")]
    NoAttention,
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[cfg(test)]
mod tests;
