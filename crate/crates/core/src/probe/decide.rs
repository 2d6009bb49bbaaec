use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::info::{entropy_unchecked, select_question};
use super::{Catalog, PosteriorState, ProbeError};

pub const DEFAULT_QUESTION_TEMPLATE: &str = "What {attribute} do you want?";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecideConfig {
    /// Recommend once the posterior entropy (bits) drops below this.
    pub threshold: f64,
    pub top_k: usize,
    /// `{attribute}` is replaced by the attribute name.
    pub question_template: String,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig {
            threshold: 1.0,
            top_k: 3,
            question_template: DEFAULT_QUESTION_TEMPLATE.to_string(),
        }
    }
}

impl DecideConfig {
    pub fn question_text(&self, attribute: &str) -> String {
        self.question_template.replace("{attribute}", attribute)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub index: usize,
    pub id: String,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionKind {
    Recommend {
        items: Vec<Recommendation>,
        /// Set when entropy is still at or above the threshold but no question helps.
        low_confidence: bool,
    },
    Ask {
        attribute: String,
        question: String,
        gain: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub kind: DecisionKind,
    pub entropy_before: f64,
    pub threshold: f64,
}

impl Decision {
    pub fn is_recommendation(&self) -> bool {
        matches!(self.kind, DecisionKind::Recommend { .. })
    }

    pub fn top(&self) -> Option<&Recommendation> {
        match &self.kind {
            DecisionKind::Recommend { items, .. } => items.first(),
            DecisionKind::Ask { .. } => None,
        }
    }
}

fn top_k(state: &PosteriorState, catalog: &Catalog, k: usize) -> Vec<Recommendation> {
    state
        .ranked(catalog)
        .into_iter()
        .take(k.max(1))
        .map(|(index, probability)| Recommendation {
            index,
            id: catalog.items()[index].id.clone(),
            probability,
        })
        .collect()
}

/// Recommend when `H(Item | inputs) < T`, otherwise ask the max-gain
/// question. With nothing left to ask the top items are returned flagged
/// low-confidence.
pub fn decide(
    state: &PosteriorState,
    catalog: &Catalog,
    asked: &BTreeSet<String>,
    config: &DecideConfig,
) -> Result<Decision, ProbeError> {
    if state.len() != catalog.len() {
        return Err(ProbeError::LengthMismatch {
            expected: catalog.len(),
            found: state.len(),
        });
    }
    let h = entropy_unchecked(&state.posterior);
    let recommend = |low_confidence| Decision {
        kind: DecisionKind::Recommend {
            items: top_k(state, catalog, config.top_k),
            low_confidence,
        },
        entropy_before: h,
        threshold: config.threshold,
    };
    if h < config.threshold {
        return Ok(recommend(false));
    }
    match select_question(state, catalog, asked) {
        Ok((attribute, gain)) => Ok(Decision {
            kind: DecisionKind::Ask {
                question: config.question_text(&attribute),
                attribute,
                gain,
            },
            entropy_before: h,
            threshold: config.threshold,
        }),
        Err(ProbeError::NoQuestion) => Ok(recommend(true)),
        Err(e) => Err(e),
    }
}
