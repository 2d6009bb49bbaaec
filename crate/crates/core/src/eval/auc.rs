use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::training::text::tokenize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Bad,
    Fair,
    Good,
    Excellent,
}

impl Label {
    /// Good and excellent count as relevant.
    pub fn is_positive(self) -> bool {
        matches!(self, Label::Good | Label::Excellent)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Bad => "bad",
            Label::Fair => "fair",
            Label::Good => "good",
            Label::Excellent => "excellent",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bad" => Ok(Label::Bad),
            "fair" => Ok(Label::Fair),
            "good" => Ok(Label::Good),
            "excellent" => Ok(Label::Excellent),
            other => Err(format!("unknown label {other:?} (expected bad, fair, good or excellent)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub query: Vec<String>,
    pub item: Vec<String>,
    pub label: Label,
}

/// Pair counts behind an AUC value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AucCounts {
    pub positives: usize,
    pub negatives: usize,
    /// Positive scored strictly above negative.
    pub concordant: u128,
    pub ties: u128,
}

impl AucCounts {
    pub fn value(&self) -> f64 {
        let pairs = self.positives as u128 * self.negatives as u128;
        (2 * self.concordant + self.ties) as f64 / (2 * pairs) as f64
    }
}

/// Mann-Whitney counts in `O(n log n)`.
pub fn auc_counts(scores: &[(f64, bool)]) -> Result<AucCounts, EvalError> {
    if scores.iter().any(|(s, _)| s.is_nan()) {
        return Err(EvalError::NanScore);
    }
    let positives = scores.iter().filter(|(_, p)| *p).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass { positives, negatives });
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN rejected above"));
    let (mut concordant, mut ties, mut neg_below) = (0u128, 0u128, 0u128);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u128, 0u128);
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            if sorted[j].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        concordant += pos * neg_below;
        ties += pos * neg;
        neg_below += neg;
        i = j;
    }
    Ok(AucCounts {
        positives,
        negatives,
        concordant,
        ties,
    })
}

/// `(concordant + ties / 2) / (P · N)`.
pub fn auc(scores: &[(f64, bool)]) -> Result<f64, EvalError> {
    Ok(auc_counts(scores)?.value())
}

#[derive(Clone, Debug, PartialEq)]
pub enum AucRow {
    Scored { score: f64, label: Label },
    Pair(LabeledPair),
}

/// `score<TAB>label` or `query<TAB>item<TAB>label` lines.
pub fn read_auc_rows(text: &str) -> Result<Vec<AucRow>, EvalError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| EvalError::Parse { line: i + 1, message };
        let fields: Vec<&str> = line.split('\t').collect();
        let row = match fields.as_slice() {
            [score, label] => AucRow::Scored {
                score: score.trim().parse().map_err(|e| err(format!("bad score {score:?}: {e}")))?,
                label: label.parse().map_err(err)?,
            },
            [query, item, label] => AucRow::Pair(LabeledPair {
                query: tokenize(query),
                item: tokenize(item),
                label: label.parse().map_err(err)?,
            }),
            _ => return Err(err(format!("expected 2 or 3 tab-separated fields, found {}", fields.len()))),
        };
        rows.push(row);
    }
    Ok(rows)
}
