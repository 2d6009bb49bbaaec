use std::collections::{BTreeMap, BTreeSet};

use super::{Catalog, PosteriorState, ProbeError};

/// Gains at or below this count as zero when choosing a question.
pub const MIN_GAIN: f64 = 1e-12;

/// Shannon entropy in bits, `0 log 0 = 0`.
pub fn entropy(dist: &[f64]) -> Result<f64, ProbeError> {
    let sum: f64 = dist.iter().sum();
    if dist.is_empty() || dist.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-6 {
        return Err(ProbeError::NotADistribution(sum));
    }
    Ok(entropy_unchecked(dist))
}

pub(crate) fn entropy_unchecked(dist: &[f64]) -> f64 {
    -dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Items grouped by their value of `attribute`, groups in order of first item.
fn groups<'c>(catalog: &'c Catalog, attribute: &str) -> Vec<(&'c str, Vec<usize>)> {
    let mut out: Vec<(&str, Vec<usize>)> = Vec::new();
    for i in 0..catalog.len() {
        let v = catalog.value(i, attribute);
        match out.iter_mut().find(|(value, _)| *value == v) {
            Some((_, members)) => members.push(i),
            None => out.push((v, vec![i])),
        }
    }
    out
}

/// `Pr(value | inputs) = Σ_items Pr(item | inputs) · 1[item has value]`.
pub fn attribute_predictive(
    state: &PosteriorState,
    catalog: &Catalog,
    attribute: &str,
) -> Result<BTreeMap<String, f64>, ProbeError> {
    catalog.require(attribute)?;
    Ok(groups(catalog, attribute)
        .into_iter()
        .map(|(v, members)| (v.to_string(), members.iter().map(|&i| state.posterior[i]).sum()))
        .collect())
}

/// `H(Item | answer, inputs) = Σ_v Pr(v) H(Item | v, inputs)`.
pub fn expected_conditional_entropy(
    state: &PosteriorState,
    catalog: &Catalog,
    attribute: &str,
) -> Result<f64, ProbeError> {
    catalog.require(attribute)?;
    let mut total = 0.0;
    for (_, members) in groups(catalog, attribute) {
        let mass: f64 = members.iter().map(|&i| state.posterior[i]).sum();
        if mass <= 0.0 {
            continue;
        }
        let conditional: Vec<f64> = members.iter().map(|&i| state.posterior[i] / mass).collect();
        total += mass * entropy_unchecked(&conditional);
    }
    Ok(total)
}

/// `I(answer; Item | inputs) = H(Item | inputs) - H(Item | answer, inputs)`.
pub fn question_information_gain(
    state: &PosteriorState,
    catalog: &Catalog,
    attribute: &str,
) -> Result<f64, ProbeError> {
    let before = entropy_unchecked(&state.posterior);
    Ok(before - expected_conditional_entropy(state, catalog, attribute)?)
}

/// Max-gain attribute not yet asked; ties go to the smaller name.
pub fn select_question(
    state: &PosteriorState,
    catalog: &Catalog,
    asked: &BTreeSet<String>,
) -> Result<(String, f64), ProbeError> {
    let mut best: Option<(String, f64)> = None;
    for attr in catalog.attributes().filter(|a| !asked.contains(*a)) {
        let gain = question_information_gain(state, catalog, attr)?;
        // attributes iterate in name order, so strict > keeps the smallest name on ties
        if best.as_ref().is_none_or(|(_, g)| gain > *g) {
            best = Some((attr.to_string(), gain));
        }
    }
    match best {
        Some((attr, gain)) if gain > MIN_GAIN => Ok((attr, gain)),
        _ => Err(ProbeError::NoQuestion),
    }
}
