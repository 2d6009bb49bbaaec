//! Greedy rewriting and conditional-likelihood relevance scoring.

use serde::{Deserialize, Serialize};

use crate::checkpoint::ModelBundle;
use crate::numerics::Tape;
use crate::seq2seq::{BoundModel, DecoderState, ModelParams, Seq2SeqError, BOS_ID, EOS_ID};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Eos,
    MaxLen,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rewrite {
    /// Emitted ids, EOS excluded.
    pub tokens: Vec<usize>,
    /// Probability of each chosen token, the final EOS included when emitted.
    pub probabilities: Vec<f64>,
    pub termination: Termination,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelevanceScore {
    /// `ln Pr(target | source)`, always `<= 0`.
    pub log_likelihood: f64,
    /// Scored tokens, EOS included.
    pub length: usize,
    pub normalized: f64,
}

impl RelevanceScore {
    fn new(log_likelihood: f64, length: usize) -> Self {
        RelevanceScore {
            log_likelihood,
            length,
            normalized: log_likelihood / length as f64,
        }
    }

    pub fn probability(&self) -> f64 {
        self.log_likelihood.exp()
    }
}

/// Lowest index among the maxima.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Feed the most likely token back in until EOS or `max_decode_len` tokens.
pub fn greedy_decode(params: &ModelParams, src: &[usize]) -> Result<Rewrite, Seq2SeqError> {
    let max_len = params.config().max_decode_len;
    let mut tape = Tape::new();
    let model = BoundModel::new(&mut tape, params);
    let enc = model.encode(&mut tape, src)?;
    let mut state = DecoderState::from_encoder(&enc, params.config().dec_layers);
    let mut prev = BOS_ID;
    let mut out = Rewrite {
        tokens: Vec::new(),
        probabilities: Vec::new(),
        termination: Termination::MaxLen,
    };
    while out.tokens.len() < max_len {
        let (dist, next) = model.decode_step(&mut tape, prev, &state, &enc)?;
        let probs = tape.value(dist).data();
        let w = argmax(probs);
        out.probabilities.push(probs[w]);
        if w == EOS_ID {
            out.termination = Termination::Eos;
            break;
        }
        out.tokens.push(w);
        state = next;
        prev = w;
    }
    Ok(out)
}

/// `Σ ln v_i(w_i)` over exactly the ids in `tgt` (nothing appended).
pub fn target_log_likelihood(
    params: &ModelParams,
    src: &[usize],
    tgt: &[usize],
) -> Result<f64, Seq2SeqError> {
    let mut tape = Tape::new();
    let model = BoundModel::new(&mut tape, params);
    let ll = model.log_likelihood(&mut tape, src, tgt)?;
    Ok(tape.value(ll).data()[0])
}

/// Log-likelihood of `tgt` followed by EOS.
pub fn sequence_log_likelihood(
    params: &ModelParams,
    src: &[usize],
    tgt: &[usize],
) -> Result<RelevanceScore, Seq2SeqError> {
    if tgt.is_empty() {
        return Err(Seq2SeqError::EmptyTarget);
    }
    let mut full = tgt.to_vec();
    full.push(EOS_ID);
    let ll = target_log_likelihood(params, src, &full)?;
    Ok(RelevanceScore::new(ll.min(0.0), full.len()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankBy {
    #[default]
    Raw,
    LengthNormalized,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScoringError {
    #[error("no candidates to score")]
    NoCandidates,
    #[error(transparent)]
    Model(#[from] Seq2SeqError),
}

/// Score `Pr(query | candidate)` for each candidate (candidate = source) and
/// rank descending. Ties keep input order.
pub fn score_candidates(
    params: &ModelParams,
    query: &[usize],
    candidates: &[Vec<usize>],
    rank_by: RankBy,
) -> Result<Vec<(usize, RelevanceScore)>, ScoringError> {
    if candidates.is_empty() {
        return Err(ScoringError::NoCandidates);
    }
    let mut scored = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| Ok((i, sequence_log_likelihood(params, c, query)?)))
        .collect::<Result<Vec<_>, Seq2SeqError>>()?;
    let key = |s: &RelevanceScore| match rank_by {
        RankBy::Raw => s.log_likelihood,
        RankBy::LengthNormalized => s.normalized,
    };
    scored.sort_by(|a, b| key(&b.1).total_cmp(&key(&a.1)));
    Ok(scored)
}

impl ModelBundle {
    /// Rewrite tokenized text; returns the output words alongside the raw result.
    pub fn rewrite<S: AsRef<str>>(&self, src: &[S]) -> Result<(Vec<String>, Rewrite), Seq2SeqError> {
        let ids = self.src_vocab.encode(src);
        let r = greedy_decode(&self.params, &ids)?;
        Ok((self.tgt_vocab.decode(&r.tokens), r))
    }

    /// `Pr(target | source)` on tokenized text.
    pub fn score<S: AsRef<str>>(&self, src: &[S], tgt: &[S]) -> Result<RelevanceScore, Seq2SeqError> {
        sequence_log_likelihood(&self.params, &self.src_vocab.encode(src), &self.tgt_vocab.encode(tgt))
    }
}
