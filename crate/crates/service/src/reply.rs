use serde::{Deserialize, Serialize};

use seqprobe::probe::DialogConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplyKind {
    Question,
    Recommendation,
    Clarification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemCard {
    pub id: String,
    pub title: String,
    pub probability: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Posterior entropy in bits when the decision was made.
    pub entropy_bits: f64,
    pub threshold: f64,
    /// Expected information gain of the question asked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    /// Tokens the posterior update actually used (after rewriting).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interpreted_as: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_value: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BotReply {
    pub v: u32,
    pub kind: ReplyKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub items: Vec<ItemCard>,
    /// Recommendation made without reaching the entropy threshold.
    #[serde(default)]
    pub low_confidence: bool,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Bot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub role: Role,
    pub text: String,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<BotReply>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub v: u32,
    pub id: String,
    pub entropy_bits: f64,
    pub items: usize,
    pub rewrite: bool,
    pub config: DialogConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSnapshot {
    pub v: u32,
    pub session: String,
    pub entropy_bits: f64,
    /// Descending probability, ties by id.
    pub items: Vec<ItemCard>,
    pub asked: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending_question: Option<String>,
    pub inputs: usize,
}
