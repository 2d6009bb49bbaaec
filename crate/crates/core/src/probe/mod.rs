//! Naive-Bayes posterior over a catalog, entropy-gated recommendation, and
//! information-gain question selection.

mod answer;
mod catalog;
mod decide;
mod dialog;
mod info;
mod posterior;
mod sim;


pub use answer::{apply_answer, match_answer, AnswerModel, DEFAULT_ANSWER_EPS};
pub use catalog::{Catalog, Item, UNKNOWN_VALUE};
pub use decide::{decide, DecideConfig, Decision, DecisionKind, Recommendation, DEFAULT_QUESTION_TEMPLATE};
pub use dialog::{AnswerMode, Dialog, DialogConfig};
pub use info::{
    attribute_predictive, entropy, expected_conditional_entropy, question_information_gain,
    select_question, MIN_GAIN,
};
pub use posterior::{posterior_update, ItemLikelihood, PosteriorState, LOG_FLOOR};
pub use sim::{simulate, simulate_trials, SimOutcome, SimSummary};

#[derive(Debug, thiserror::Error)]
pub enum ProbeError {
    #[error("catalog has no items")]
    EmptyCatalog,
    #[error("duplicate item id {0:?}")]
    DuplicateId(String),
    #[error("catalog line {0}: {1}")]
    CatalogLine(usize, String),
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("attribute {0:?} was not asked in this dialog")]
    AttributeNotAsked(String),
    #[error("no attribute has positive information gain")]
    NoQuestion,
    #[error("every item's likelihood is at the floor")]
    DegeneratePosterior,
    #[error("prior weights must be finite, non-negative and not all zero")]
    InvalidPrior,
    #[error("not a probability distribution (sum {0})")]
    NotADistribution(f64),
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("likelihood model: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<crate::seq2seq::Seq2SeqError> for ProbeError {
    fn from(e: crate::seq2seq::Seq2SeqError) -> Self {
        ProbeError::Model(e.to_string())
    }
}
