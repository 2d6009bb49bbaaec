use serde::{Deserialize, Serialize};

use super::{Catalog, Item, ProbeError};
use crate::numerics::log_sum_exp;

/// Log-likelihood floor: anything lower (including `-inf`) is clamped here and
/// the item counts as excluded by that input.
pub const LOG_FLOOR: f64 = -1.0e6;

/// `ln Pr(input | item)` for one user input.
pub trait ItemLikelihood {
    fn log_likelihood(&self, input: &[String], item: &Item) -> Result<f64, ProbeError>;
}

impl<F: Fn(&[String], &Item) -> f64> ItemLikelihood for F {
    fn log_likelihood(&self, input: &[String], item: &Item) -> Result<f64, ProbeError> {
        Ok(self(input, item))
    }
}

/// The seq2seq scorer: `ln Pr(input | item title)`, title as the source.
impl ItemLikelihood for crate::checkpoint::ModelBundle {
    fn log_likelihood(&self, input: &[String], item: &Item) -> Result<f64, ProbeError> {
        if item.title.is_empty() {
            return Ok(LOG_FLOOR);
        }
        Ok(self.score(&item.title, input)?.log_likelihood)
    }
}

/// Naive-Bayes posterior over catalog items. Updates return a new value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    pub prior: Vec<f64>,
    pub inputs: Vec<Vec<String>>,
    /// `ln π(item) + Σ ln Pr(input_i | item)`.
    pub log_weights: Vec<f64>,
    pub posterior: Vec<f64>,
}

fn floor(x: f64) -> f64 {
    if x.is_nan() {
        LOG_FLOOR
    } else {
        x.max(LOG_FLOOR)
    }
}

impl PosteriorState {
    pub fn uniform(items: usize) -> Result<Self, ProbeError> {
        if items == 0 {
            return Err(ProbeError::EmptyCatalog);
        }
        Self::with_prior(vec![1.0; items])
    }

    /// Prior from non-negative weights (normalized here).
    pub fn with_prior(weights: Vec<f64>) -> Result<Self, ProbeError> {
        if weights.is_empty() {
            return Err(ProbeError::EmptyCatalog);
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || total <= 0.0 || !total.is_finite() {
            return Err(ProbeError::InvalidPrior);
        }
        let prior: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let log_weights: Vec<f64> = prior.iter().map(|p| floor(p.ln())).collect();
        Ok(PosteriorState {
            posterior: prior.clone(),
            prior,
            inputs: Vec::new(),
            log_weights,
        })
    }

    pub fn len(&self) -> usize {
        self.posterior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posterior.is_empty()
    }

    /// Fold in one input given its per-item log-likelihoods.
    pub fn update_with(&self, input: &[String], log_likelihoods: &[f64]) -> Result<Self, ProbeError> {
        if log_likelihoods.len() != self.len() {
            return Err(ProbeError::LengthMismatch {
                expected: self.len(),
                found: log_likelihoods.len(),
            });
        }
        let lls: Vec<f64> = log_likelihoods.iter().map(|&l| floor(l)).collect();
        if lls.iter().all(|&l| l <= LOG_FLOOR) {
            return Err(ProbeError::DegeneratePosterior);
        }
        let log_weights: Vec<f64> = self
            .log_weights
            .iter()
            .zip(&lls)
            .map(|(w, l)| floor(w + l))
            .collect();
        if log_weights.iter().all(|&w| w <= LOG_FLOOR) {
            return Err(ProbeError::DegeneratePosterior);
        }
        let mut inputs = self.inputs.clone();
        inputs.push(input.to_vec());
        Ok(PosteriorState {
            prior: self.prior.clone(),
            inputs,
            posterior: normalize(&log_weights),
            log_weights,
        })
    }

    /// Items by posterior, descending; equal probabilities ordered by id.
    pub fn ranked(&self, catalog: &Catalog) -> Vec<(usize, f64)> {
        let mut order: Vec<(usize, f64)> = self.posterior.iter().copied().enumerate().collect();
        order.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| catalog.items()[a.0].id.cmp(&catalog.items()[b.0].id))
        });
        order
    }
}

fn normalize(log_weights: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(log_weights);
    log_weights.iter().map(|w| (w - z).exp()).collect()
}

/// `Pr(item | inputs) ∝ π(item) Π Pr(input_i | item)`, one more input folded in.
pub fn posterior_update<L: ItemLikelihood + ?Sized>(
    state: &PosteriorState,
    catalog: &Catalog,
    input: &[String],
    likelihood: &L,
) -> Result<PosteriorState, ProbeError> {
    if catalog.len() != state.len() {
        return Err(ProbeError::LengthMismatch {
            expected: catalog.len(),
            found: state.len(),
        });
    }
    let lls: Vec<f64> = catalog
        .items()
        .iter()
        .map(|item| likelihood.log_likelihood(input, item))
        .collect::<Result<_, _>>()?;
    state.update_with(input, &lls)
}
