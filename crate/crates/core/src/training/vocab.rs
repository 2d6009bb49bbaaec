use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::TrainingError;
use crate::seq2seq::{EOS_ID, RESERVED_TOKENS, UNK_ID};

pub const UNK: &str = "<unk>";
pub const EOS: &str = "<eos>";
pub const BOS: &str = "<bos>";

/// Word/id map with reserved ids `0 = UNK`, `1 = EOS`, `2 = BOS`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    /// Keep the `max_size - 3` most frequent words; ties go to the
    /// lexicographically smaller word.
    pub fn build<'a, I, S>(sequences: I, max_size: usize) -> Result<Self, TrainingError>
    where
        I: IntoIterator<Item = &'a [S]>,
        S: AsRef<str> + 'a,
    {
        if max_size < RESERVED_TOKENS + 1 {
            return Err(TrainingError::VocabTooSmall(max_size));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut any = false;
        for seq in sequences {
            for w in seq {
                any = true;
                *counts.entry(w.as_ref()).or_default() += 1;
            }
        }
        if !any {
            return Err(TrainingError::EmptyCorpus);
        }
        let mut ranked: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|(w, _)| ![UNK, EOS, BOS].contains(w))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        ranked.truncate(max_size - RESERVED_TOKENS);
        Ok(Self::from_words(ranked.into_iter().map(|(w, _)| w.to_string())))
    }

    /// Vocabulary with the reserved tokens followed by `words` in order.
    pub fn from_words<I: IntoIterator<Item = String>>(words: I) -> Self {
        let mut all: Vec<String> = vec![UNK.into(), EOS.into(), BOS.into()];
        all.extend(words);
        let index = all.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Vocab { words: all, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> usize {
        self.index.get(word).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    /// Ids to words, stopping at the first EOS.
    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter()
            .take_while(|&&id| id != EOS_ID)
            .map(|&id| self.word(id).unwrap_or(UNK).to_string())
            .collect()
    }
}

impl Serialize for Vocab {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.words[RESERVED_TOKENS..].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocab {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let words = Vec::<String>::deserialize(d)?;
        let mut seen = std::collections::HashSet::new();
        for w in &words {
            if [UNK, EOS, BOS].contains(&w.as_str()) || !seen.insert(w) {
                return Err(serde::de::Error::custom(format!("duplicate or reserved word {w:?}")));
            }
        }
        Ok(Vocab::from_words(words))
    }
}
