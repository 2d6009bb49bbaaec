use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AnswerMode, Catalog, DecisionKind, Dialog, DialogConfig, ProbeError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub target: String,
    pub questions: usize,
    pub asked: Vec<String>,
    pub recommended: Vec<String>,
    /// The top recommendation is the target.
    pub identified: bool,
    pub low_confidence: bool,
    pub final_entropy: f64,
}

/// Run the dialog against a user who answers every question truthfully from
/// the target item's attributes, starting from the prior.
pub fn simulate(catalog: &Catalog, target: usize, config: &DialogConfig) -> Result<SimOutcome, ProbeError> {
    let mut config = config.clone();
    config.answer_mode = AnswerMode::AttributeExact;
    let mut dialog = Dialog::new(catalog, config)?;
    let mut asked = Vec::new();
    loop {
        let decision = dialog.next_decision(catalog)?;
        match decision.kind {
            DecisionKind::Ask { attribute, .. } => {
                let answer: Vec<String> = catalog
                    .value(target, &attribute)
                    .split_whitespace()
                    .map(str::to_string)
                    .collect();
                dialog.observe(catalog, &answer, None)?;
                asked.push(attribute);
            }
            DecisionKind::Recommend { items, low_confidence } => {
                let target_id = &catalog.items()[target].id;
                return Ok(SimOutcome {
                    target: target_id.clone(),
                    questions: asked.len(),
                    asked,
                    identified: items.first().is_some_and(|r| &r.id == target_id),
                    recommended: items.into_iter().map(|r| r.id).collect(),
                    low_confidence,
                    final_entropy: decision.entropy_before,
                });
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub trials: usize,
    pub threshold: f64,
    pub mean_questions: f64,
    pub identified: usize,
    /// Questions asked → number of trials.
    pub questions_histogram: BTreeMap<usize, usize>,
    pub outcomes: Vec<SimOutcome>,
}

/// `trials` dialogs with targets drawn uniformly by a seeded generator.
pub fn simulate_trials(
    catalog: &Catalog,
    config: &DialogConfig,
    trials: usize,
    seed: u64,
) -> Result<SimSummary, ProbeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcomes = (0..trials)
        .map(|_| simulate(catalog, rng.gen_range(0..catalog.len()), config))
        .collect::<Result<Vec<_>, _>>()?;
    let mut questions_histogram = BTreeMap::new();
    for o in &outcomes {
        *questions_histogram.entry(o.questions).or_insert(0) += 1;
    }
    let total: usize = outcomes.iter().map(|o| o.questions).sum();
    Ok(SimSummary {
        trials,
        threshold: config.decide.threshold,
        mean_questions: if trials == 0 { 0.0 } else { total as f64 / trials as f64 },
        identified: outcomes.iter().filter(|o| o.identified).count(),
        questions_histogram,
        outcomes,
    })
}
