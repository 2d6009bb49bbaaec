//! Model file: config, both vocabularies and every named tensor, as JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seq2seq::{ModelConfig, ModelParams, NamedTensor, Seq2SeqError};
use crate::training::Vocab;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("{side} vocabulary has {found} entries, config says {expected}")]
    VocabSize {
        side: &'static str,
        found: usize,
        expected: usize,
    },
    #[error(transparent)]
    Model(#[from] Seq2SeqError),
}

/// A trained model with the vocabularies needed to use it on text.
#[derive(Clone, Debug)]
pub struct ModelBundle {
    pub src_vocab: Vocab,
    pub tgt_vocab: Vocab,
    pub params: ModelParams,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    v: u32,
    config: ModelConfig,
    src_vocab: Vocab,
    tgt_vocab: Vocab,
    params: Vec<NamedTensor>,
}

impl ModelBundle {
    pub fn config(&self) -> &ModelConfig {
        self.params.config()
    }

    pub fn to_json(&self) -> Result<String, CheckpointError> {
        let wire = Wire {
            v: FORMAT_VERSION,
            config: self.config().clone(),
            src_vocab: self.src_vocab.clone(),
            tgt_vocab: self.tgt_vocab.clone(),
            params: self.params.to_named(),
        };
        Ok(serde_json::to_string(&wire)?)
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let wire: Wire = serde_json::from_str(text)?;
        if wire.v != FORMAT_VERSION {
            return Err(CheckpointError::Version(wire.v));
        }
        let check = |side, vocab: &Vocab, expected| {
            if vocab.len() == expected {
                Ok(())
            } else {
                Err(CheckpointError::VocabSize {
                    side,
                    found: vocab.len(),
                    expected,
                })
            }
        };
        check("source", &wire.src_vocab, wire.config.src_vocab_size)?;
        check("target", &wire.tgt_vocab, wire.config.tgt_vocab_size)?;
        let params = ModelParams::from_named(&wire.config, wire.params)?;
        Ok(ModelBundle {
            src_vocab: wire.src_vocab,
            tgt_vocab: wire.tgt_vocab,
            params,
        })
    }

    /// Write atomically (temp file + rename).
    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CheckpointError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
