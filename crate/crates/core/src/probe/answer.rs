use super::{posterior_update, Catalog, ItemLikelihood, PosteriorState, ProbeError, UNKNOWN_VALUE};

/// Likelihood of an answer for items whose value disagrees with it.
pub const DEFAULT_ANSWER_EPS: f64 = 0.01;

/// How an answer to an attribute question is turned into item likelihoods.
pub enum AnswerModel<'a> {
    /// Match the answer to a schema value; items with that value get
    /// `1 - eps`, the rest `eps`.
    AttributeExact { eps: f64 },
    /// Treat the answer as one more free-text input.
    SequenceLikelihood(&'a dyn ItemLikelihood),
}

/// The schema value named by `answer`: the whole answer if it equals a value
/// (case-insensitive), else the single value occurring as a contiguous run of
/// answer tokens, else `"unknown"`.
pub fn match_answer<'c>(catalog: &'c Catalog, attribute: &str, answer: &[String]) -> Result<&'c str, ProbeError> {
    catalog.require(attribute)?;
    let values = &catalog.schema()[attribute];
    let lowered: Vec<String> = answer.iter().map(|t| t.to_lowercase()).collect();
    let joined = lowered.join(" ");
    if let Some(v) = values.get(joined.trim()) {
        return Ok(v);
    }
    let hits: Vec<&String> = values
        .iter()
        .filter(|v| v.as_str() != UNKNOWN_VALUE)
        .filter(|v| {
            let parts: Vec<&str> = v.split_whitespace().collect();
            !parts.is_empty()
                && lowered
                    .windows(parts.len())
                    .any(|w| w.iter().zip(&parts).all(|(a, b)| a == b))
        })
        .collect();
    Ok(match hits.as_slice() {
        [only] => only.as_str(),
        _ => UNKNOWN_VALUE,
    })
}

/// Fold the user's answer to a question about `attribute` into the posterior.
pub fn apply_answer(
    state: &PosteriorState,
    catalog: &Catalog,
    attribute: &str,
    answer: &[String],
    model: &AnswerModel<'_>,
) -> Result<PosteriorState, ProbeError> {
    match model {
        AnswerModel::AttributeExact { eps } => {
            if !(*eps > 0.0 && *eps < 1.0) {
                return Err(ProbeError::Model(format!("answer eps must be in (0, 1), got {eps}")));
            }
            let value = match_answer(catalog, attribute, answer)?;
            let lls: Vec<f64> = if value == UNKNOWN_VALUE {
                vec![0.0; catalog.len()]
            } else {
                (0..catalog.len())
                    .map(|i| {
                        if catalog.value(i, attribute) == value {
                            (1.0 - eps).ln()
                        } else {
                            eps.ln()
                        }
                    })
                    .collect()
            };
            state.update_with(answer, &lls)
        }
        AnswerModel::SequenceLikelihood(likelihood) => {
            catalog.require(attribute)?;
            posterior_update(state, catalog, answer, *likelihood)
        }
    }
}
