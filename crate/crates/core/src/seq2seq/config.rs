use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Seq2SeqError;

/// Score function used to weight encoder states at each decoder step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Attention {
    None,
    /// `s_j . h`
    Dot,
    /// `s_j^T W_g h`
    General,
    /// `W_cc [s_j; h]`
    Concat,
    /// `U (s_j^T W h + V [s_j; h] + b)` with `W` holding `k` bilinear slices.
    Tensor { k: usize },
}

pub const DEFAULT_TENSOR_SLICES: usize = 8;

impl Attention {
    pub fn all(k: usize) -> [Attention; 5] {
        [
            Attention::None,
            Attention::Dot,
            Attention::General,
            Attention::Concat,
            Attention::Tensor { k },
        ]
    }

    pub fn is_none(self) -> bool {
        matches!(self, Attention::None)
    }
}

impl fmt::Display for Attention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attention::None => f.write_str("none"),
            Attention::Dot => f.write_str("dot"),
            Attention::General => f.write_str("general"),
            Attention::Concat => f.write_str("concat"),
            Attention::Tensor { k } => write!(f, "tensor:{k}"),
        }
    }
}

impl FromStr for Attention {
    type Err = Seq2SeqError;

    /// `none | dot | general | concat | tensor[:k]`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (lower.as_str(), None),
        };
        let bad = || Seq2SeqError::InvalidConfig(format!("unknown attention variant {s:?}"));
        match (name, arg) {
            ("none", None) => Ok(Attention::None),
            ("dot", None) => Ok(Attention::Dot),
            ("general", None) => Ok(Attention::General),
            ("concat", None) => Ok(Attention::Concat),
            ("tensor", None) => Ok(Attention::Tensor {
                k: DEFAULT_TENSOR_SLICES,
            }),
            ("tensor", Some(k)) => k
                .parse()
                .ok()
                .filter(|&k| k >= 1)
                .map(|k| Attention::Tensor { k })
                .ok_or_else(bad),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub src_vocab_size: usize,
    pub tgt_vocab_size: usize,
    pub d_emb: usize,
    /// Decoder hidden size. Each encoder direction uses `d_h / 2`.
    pub d_h: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub attention: Attention,
    pub max_decode_len: usize,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), Seq2SeqError> {
        let fail = |msg: &str| Err(Seq2SeqError::InvalidConfig(msg.to_string()));
        if self.src_vocab_size < 3 || self.tgt_vocab_size < 3 {
            return fail("vocabularies need room for the three reserved tokens");
        }
        if self.d_emb == 0 {
            return fail("d_emb must be positive");
        }
        if self.d_h == 0 || self.d_h % 2 != 0 {
            return fail("d_h must be positive and even");
        }
        if self.enc_layers == 0 || self.dec_layers == 0 {
            return fail("encoder and decoder need at least one layer");
        }
        if self.max_decode_len == 0 {
            return fail("max_decode_len must be positive");
        }
        if let Attention::Tensor { k } = self.attention {
            if k == 0 {
                return fail("tensor attention needs k >= 1");
            }
        }
        Ok(())
    }

    pub fn enc_hidden(&self) -> usize {
        self.d_h / 2
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            src_vocab_size: 1000,
            tgt_vocab_size: 1000,
            d_emb: 32,
            d_h: 64,
            enc_layers: 1,
            dec_layers: 1,
            attention: Attention::General,
            max_decode_len: 20,
        }
    }
}
