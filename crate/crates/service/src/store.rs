use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use seqprobe::probe::DialogConfig;

use crate::reply::TranscriptEntry;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub(crate) enum StoredLine {
    Session { id: String, config: DialogConfig, rewrite: bool },
    Turn(TranscriptEntry),
}

/// Append-only JSON Lines transcripts, one file per session.
#[derive(Clone, Debug)]
pub struct TranscriptStore {
    dir: PathBuf,
}

impl TranscriptStore {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(TranscriptStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    pub(crate) fn append(&self, id: &str, line: &StoredLine) -> io::Result<()> {
        let mut file = OpenOptions::new().create(true).append(true).open(self.path(id))?;
        let mut text = serde_json::to_string(line)?;
        text.push('\n');
        file.write_all(text.as_bytes())?;
        file.flush()
    }

    pub(crate) fn load_all(&self) -> io::Result<BTreeMap<String, Vec<StoredLine>>> {
        let mut out = BTreeMap::new();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let mut lines = Vec::new();
            for line in BufReader::new(fs::File::open(&path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                lines.push(serde_json::from_str(&line)?);
            }
            out.insert(id.to_string(), lines);
        }
        Ok(out)
    }
}
