use std::collections::HashMap;

use super::EvalError;
use crate::training::text::tokenize;

pub const DEFAULT_MAX_N: usize = 4;

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped matches and candidate n-gram total for each order 1..=max_n.
fn clipped<S: AsRef<str>>(candidate: &[S], references: &[Vec<S>], max_n: usize) -> Vec<(usize, usize)> {
    (1..=max_n)
        .map(|n| {
            let cand = ngram_counts(candidate, n);
            let mut max_ref: HashMap<Vec<&str>, usize> = HashMap::new();
            for r in references {
                for (g, c) in ngram_counts(r, n) {
                    let e = max_ref.entry(g).or_insert(0);
                    *e = (*e).max(c);
                }
            }
            let matched = cand
                .iter()
                .map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0)))
                .sum();
            (matched, candidate.len().saturating_sub(n - 1))
        })
        .collect()
}

/// Reference length closest to `c`, the shorter one on ties.
fn closest_ref_len<S>(c: usize, references: &[Vec<S>]) -> usize {
    references
        .iter()
        .map(Vec::len)
        .min_by_key(|&r| (r.abs_diff(c), r))
        .unwrap_or(0)
}

fn brevity_penalty(c: usize, r: usize) -> f64 {
    if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

fn geometric(precisions: impl Iterator<Item = (f64, f64)>, max_n: usize) -> f64 {
    let mut log_sum = 0.0;
    for (num, den) in precisions {
        if num <= 0.0 {
            return 0.0;
        }
        log_sum += (num / den).ln();
    }
    (log_sum / max_n as f64).exp()
}

/// Sentence BLEU: geometric mean of clipped n-gram precisions times the
/// brevity penalty. Candidates under 4 tokens get add-one smoothing on
/// orders above 1 that have no matches. An empty candidate scores 0.
pub fn bleu<S: AsRef<str>>(candidate: &[S], references: &[Vec<S>], max_n: usize) -> Result<f64, EvalError> {
    if references.is_empty() {
        return Err(EvalError::NoReferences);
    }
    if max_n == 0 {
        return Err(EvalError::InvalidOrder);
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    let smooth = candidate.len() < 4;
    let counts = clipped(candidate, references, max_n);
    let p = counts.iter().enumerate().map(|(i, &(m, t))| {
        if smooth && i > 0 && m == 0 {
            (1.0, t as f64 + 1.0)
        } else {
            (m as f64, t as f64)
        }
    });
    let bp = brevity_penalty(candidate.len(), closest_ref_len(candidate.len(), references));
    Ok((bp * geometric(p, max_n)).min(1.0))
}

/// Mean sentence BLEU, or with `pooled` the score from counts summed over the corpus.
pub fn corpus_bleu<S: AsRef<str>>(
    pairs: &[(Vec<S>, Vec<Vec<S>>)],
    max_n: usize,
    pooled: bool,
) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    if !pooled {
        let mut total = 0.0;
        for (c, refs) in pairs {
            total += bleu(c, refs, max_n)?;
        }
        return Ok(total / pairs.len() as f64);
    }
    if max_n == 0 {
        return Err(EvalError::InvalidOrder);
    }
    let mut sums = vec![(0usize, 0usize); max_n];
    let (mut c_len, mut r_len) = (0, 0);
    for (c, refs) in pairs {
        if refs.is_empty() {
            return Err(EvalError::NoReferences);
        }
        for (acc, (m, t)) in sums.iter_mut().zip(clipped(c, refs, max_n)) {
            acc.0 += m;
            acc.1 += t;
        }
        c_len += c.len();
        r_len += closest_ref_len(c.len(), refs);
    }
    if c_len == 0 {
        return Ok(0.0);
    }
    let p = sums.iter().map(|&(m, t)| (m as f64, t as f64));
    Ok((brevity_penalty(c_len, r_len) * geometric(p, max_n)).min(1.0))
}

/// One line of a BLEU input file: candidate, then one or more references.
#[derive(Clone, Debug, PartialEq)]
pub struct BleuRow {
    pub candidate: Vec<String>,
    pub references: Vec<Vec<String>>,
}

/// Tab-separated `candidate<TAB>reference[<TAB>reference...]`, tokenized.
pub fn read_bleu_rows(text: &str) -> Result<Vec<BleuRow>, EvalError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let candidate = tokenize(fields.next().unwrap_or(""));
        let references: Vec<Vec<String>> = fields.map(tokenize).collect();
        if references.is_empty() {
            return Err(EvalError::Parse {
                line: i + 1,
                message: "expected candidate<TAB>reference".into(),
            });
        }
        rows.push(BleuRow { candidate, references });
    }
    Ok(rows)
}
