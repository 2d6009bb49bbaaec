use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    apply_answer, decide, posterior_update, AnswerModel, Catalog, DecideConfig, Decision, DecisionKind,
    ItemLikelihood, PosteriorState, ProbeError, DEFAULT_ANSWER_EPS,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerMode {
    #[default]
    AttributeExact,
    SequenceLikelihood,
}

impl fmt::Display for AnswerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnswerMode::AttributeExact => "attribute-exact",
            AnswerMode::SequenceLikelihood => "sequence-likelihood",
        })
    }
}

impl FromStr for AnswerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "attribute-exact" | "exact" => Ok(AnswerMode::AttributeExact),
            "sequence-likelihood" | "sequence" => Ok(AnswerMode::SequenceLikelihood),
            other => Err(format!("unknown answer mode {other:?} (expected attribute-exact or sequence-likelihood)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DialogConfig {
    #[serde(flatten)]
    pub decide: DecideConfig,
    pub answer_mode: AnswerMode,
    pub answer_eps: f64,
}

impl Default for DialogConfig {
    fn default() -> Self {
        DialogConfig {
            decide: DecideConfig::default(),
            answer_mode: AnswerMode::AttributeExact,
            answer_eps: DEFAULT_ANSWER_EPS,
        }
    }
}

/// The ask-or-recommend loop for one user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dialog {
    pub config: DialogConfig,
    pub state: PosteriorState,
    pub asked: BTreeSet<String>,
    /// Attribute of the question awaiting an answer.
    pub pending: Option<String>,
}

impl Dialog {
    pub fn new(catalog: &Catalog, config: DialogConfig) -> Result<Self, ProbeError> {
        Self::with_state(PosteriorState::uniform(catalog.len())?, config)
    }

    pub fn with_state(state: PosteriorState, config: DialogConfig) -> Result<Self, ProbeError> {
        Ok(Dialog {
            config,
            state,
            asked: BTreeSet::new(),
            pending: None,
        })
    }

    /// Fold in one user input: an answer when a question is pending, free
    /// text otherwise. Leaves the dialog untouched on error.
    pub fn observe(
        &mut self,
        catalog: &Catalog,
        input: &[String],
        likelihood: Option<&dyn ItemLikelihood>,
    ) -> Result<(), ProbeError> {
        let missing = || ProbeError::Model("no likelihood model configured".into());
        let next = match (&self.pending, self.config.answer_mode) {
            (Some(attr), AnswerMode::AttributeExact) => apply_answer(
                &self.state,
                catalog,
                attr,
                input,
                &AnswerModel::AttributeExact {
                    eps: self.config.answer_eps,
                },
            )?,
            (Some(attr), AnswerMode::SequenceLikelihood) => apply_answer(
                &self.state,
                catalog,
                attr,
                input,
                &AnswerModel::SequenceLikelihood(likelihood.ok_or_else(missing)?),
            )?,
            (None, _) => posterior_update(&self.state, catalog, input, likelihood.ok_or_else(missing)?)?,
        };
        self.state = next;
        self.pending = None;
        Ok(())
    }

    /// Decide on the current posterior; a question becomes pending.
    pub fn next_decision(&mut self, catalog: &Catalog) -> Result<Decision, ProbeError> {
        let d = decide(&self.state, catalog, &self.asked, &self.config.decide)?;
        self.pending = match &d.kind {
            DecisionKind::Ask { attribute, .. } => {
                self.asked.insert(attribute.clone());
                Some(attribute.clone())
            }
            DecisionKind::Recommend { .. } => None,
        };
        Ok(d)
    }

    pub fn step(
        &mut self,
        catalog: &Catalog,
        input: &[String],
        likelihood: Option<&dyn ItemLikelihood>,
    ) -> Result<Decision, ProbeError> {
        self.observe(catalog, input, likelihood)?;
        self.next_decision(catalog)
    }
}
