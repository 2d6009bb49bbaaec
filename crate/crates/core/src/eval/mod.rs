//! Rewrite and ranking metrics: sentence/corpus BLEU and ROC AUC.

mod auc;
mod bleu;

pub use auc::{auc, auc_counts, read_auc_rows, AucCounts, AucRow, Label, LabeledPair};
pub use bleu::{bleu, corpus_bleu, read_bleu_rows, BleuRow, DEFAULT_MAX_N};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("no references given")]
    NoReferences,
    #[error("nothing to evaluate")]
    Empty,
    #[error("max_n must be at least 1")]
    InvalidOrder,
    #[error("AUC needs at least one positive and one negative (got {positives} and {negatives})")]
    SingleClass { positives: usize, negatives: usize },
    #[error("score is NaN")]
    NanScore,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
