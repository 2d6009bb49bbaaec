use std::io::BufRead;
use std::path::Path;

use super::text::tokenize;
use super::{TrainingError, Vocab};
use crate::seq2seq::EOS_ID;

/// Tokenized `(source, target)` pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairCorpus {
    pub pairs: Vec<(Vec<String>, Vec<String>)>,
    pub provenance: String,
}

impl PairCorpus {
    pub fn new(provenance: impl Into<String>) -> Self {
        PairCorpus {
            pairs: Vec::new(),
            provenance: provenance.into(),
        }
    }

    pub fn push(&mut self, src: Vec<String>, tgt: Vec<String>) -> Result<(), TrainingError> {
        if src.is_empty() || tgt.is_empty() {
            return Err(TrainingError::EmptySide(self.pairs.len() + 1));
        }
        self.pairs.push((src, tgt));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// One `source<TAB>target` pair per line. Blank lines are skipped.
    pub fn read<R: BufRead>(reader: R, provenance: &str) -> Result<Self, TrainingError> {
        let mut corpus = PairCorpus::new(provenance);
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (src, tgt) = line
                .split_once('\t')
                .ok_or(TrainingError::MissingTab(n + 1))?;
            let (src, tgt) = (tokenize(src), tokenize(tgt));
            if src.is_empty() || tgt.is_empty() {
                return Err(TrainingError::EmptySide(n + 1));
            }
            corpus.pairs.push((src, tgt));
        }
        Ok(corpus)
    }

    pub fn load(path: &Path) -> Result<Self, TrainingError> {
        let file = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(file), &path.display().to_string())
    }

    pub fn sources(&self) -> impl Iterator<Item = &[String]> {
        self.pairs.iter().map(|(s, _)| s.as_slice())
    }

    pub fn targets(&self) -> impl Iterator<Item = &[String]> {
        self.pairs.iter().map(|(_, t)| t.as_slice())
    }
}

/// Source ids, and target ids with EOS appended. Unknown words map to UNK.
pub fn encode_pair<S: AsRef<str>>(
    src: &[S],
    tgt: &[S],
    src_vocab: &Vocab,
    tgt_vocab: &Vocab,
) -> Result<(Vec<usize>, Vec<usize>), TrainingError> {
    if src.is_empty() || tgt.is_empty() {
        return Err(TrainingError::EmptySide(0));
    }
    let mut t = tgt_vocab.encode(tgt);
    t.push(EOS_ID);
    Ok((src_vocab.encode(src), t))
}
