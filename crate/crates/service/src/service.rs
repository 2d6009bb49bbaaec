use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock, TryLockError};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use seqprobe::checkpoint::ModelBundle;
use seqprobe::probe::{
    entropy, match_answer, AnswerMode, Catalog, DecisionKind, Dialog, DialogConfig, ItemLikelihood, ProbeError,
};
use seqprobe::training::text::tokenize;
use seqprobe::training::UNK;

use crate::reply::{BotReply, Diagnostics, ItemCard, PosteriorSnapshot, ReplyKind, Role, SessionCreated, TranscriptEntry};
use crate::store::{StoredLine, TranscriptStore};
use crate::API_VERSION;

const ASK_AGAIN: &str = "Could you tell me what you are looking for?";
const NO_MATCH: &str = "Nothing in the catalog matches that. Could you put it another way?";

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no session {0:?}")]
    UnknownSession(String),
    #[error("no catalog {0:?}")]
    UnknownCatalog(String),
    #[error("session {0:?} is handling another message")]
    Busy(String),
    #[error("invalid session settings: {0}")]
    InvalidOverride(String),
    #[error("replayed session {session:?} diverged at user turn {turn}")]
    ReplayMismatch { session: String, turn: usize },
    #[error("transcript store: {0}")]
    Store(String),
    #[error(transparent)]
    Probe(#[from] ProbeError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub catalog_name: String,
    pub dialog: DialogConfig,
    /// Rewrite free-text turns before scoring them (needs a rewriter model).
    pub rewrite: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            catalog_name: "default".into(),
            dialog: DialogConfig::default(),
            rewrite: true,
        }
    }
}

/// Per-session settings accepted by `POST /sessions`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionOverrides {
    pub catalog: Option<String>,
    pub threshold: Option<f64>,
    pub top_k: Option<usize>,
    pub answer_mode: Option<AnswerMode>,
    pub rewrite: Option<bool>,
}

struct Session {
    id: String,
    dialog: Dialog,
    rewrite: bool,
    transcript: Vec<TranscriptEntry>,
}

pub struct ChatService {
    catalog: Catalog,
    scorer: ModelBundle,
    rewriter: Option<ModelBundle>,
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    store: Option<TranscriptStore>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn posterior_entropy(dialog: &Dialog) -> Result<f64, ServiceError> {
    Ok(entropy(&dialog.state.posterior)?)
}

impl ChatService {
    pub fn new(catalog: Catalog, scorer: ModelBundle, rewriter: Option<ModelBundle>, config: ServiceConfig) -> Self {
        ChatService {
            catalog,
            scorer,
            rewriter,
            config,
            sessions: RwLock::new(HashMap::new()),
            store: None,
        }
    }

    /// Persist transcripts under `store`, first replaying any sessions already there.
    pub fn with_store(mut self, store: TranscriptStore) -> Result<Self, ServiceError> {
        for (id, lines) in store.load_all().map_err(|e| ServiceError::Store(e.to_string()))? {
            self.restore(&id, &lines)?;
        }
        self.store = Some(store);
        Ok(self)
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().expect("session map poisoned").len()
    }

    fn session_config(&self, overrides: &SessionOverrides) -> Result<(DialogConfig, bool), ServiceError> {
        if let Some(name) = &overrides.catalog {
            if *name != self.config.catalog_name {
                return Err(ServiceError::UnknownCatalog(name.clone()));
            }
        }
        let mut cfg = self.config.dialog.clone();
        if let Some(t) = overrides.threshold {
            if !(t.is_finite() && t >= 0.0) {
                return Err(ServiceError::InvalidOverride(format!("threshold must be finite and >= 0, got {t}")));
            }
            cfg.decide.threshold = t;
        }
        if let Some(k) = overrides.top_k {
            if k == 0 {
                return Err(ServiceError::InvalidOverride("top_k must be at least 1".into()));
            }
            cfg.decide.top_k = k;
        }
        if let Some(m) = overrides.answer_mode {
            cfg.answer_mode = m;
        }
        Ok((cfg, overrides.rewrite.unwrap_or(self.config.rewrite)))
    }

    pub fn create_session(&self, overrides: &SessionOverrides) -> Result<SessionCreated, ServiceError> {
        let (config, rewrite) = self.session_config(overrides)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let dialog = Dialog::new(&self.catalog, config.clone())?;
        let created = SessionCreated {
            v: API_VERSION,
            id: id.clone(),
            entropy_bits: posterior_entropy(&dialog)?,
            items: self.catalog.len(),
            rewrite,
            config: config.clone(),
        };
        if let Some(store) = &self.store {
            store
                .append(&id, &StoredLine::Session { id: id.clone(), config, rewrite })
                .map_err(|e| ServiceError::Store(e.to_string()))?;
        }
        let session = Session {
            id: id.clone(),
            dialog,
            rewrite,
            transcript: Vec::new(),
        };
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(created)
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    /// Handle one user turn. A second message for a session that is still
    /// busy is rejected with [`ServiceError::Busy`].
    pub fn handle_message(&self, id: &str, text: &str) -> Result<BotReply, ServiceError> {
        let handle = self.session(id)?;
        let mut session = match handle.try_lock() {
            Ok(guard) => guard,
            Err(TryLockError::WouldBlock) => return Err(ServiceError::Busy(id.to_string())),
            Err(TryLockError::Poisoned(p)) => p.into_inner(),
        };
        let reply = self.respond(&mut session, text)?;
        let user = TranscriptEntry {
            role: Role::User,
            text: text.to_string(),
            timestamp_ms: now_ms(),
            reply: None,
        };
        let bot = TranscriptEntry {
            role: Role::Bot,
            text: reply.text.clone(),
            timestamp_ms: now_ms(),
            reply: Some(reply.clone()),
        };
        if let Some(store) = &self.store {
            for entry in [&user, &bot] {
                store
                    .append(&session.id, &StoredLine::Turn(entry.clone()))
                    .map_err(|e| ServiceError::Store(e.to_string()))?;
            }
        }
        session.transcript.push(user);
        session.transcript.push(bot);
        Ok(reply)
    }

    fn clarification(dialog: &Dialog, text: &str, entropy_bits: f64) -> BotReply {
        BotReply {
            v: API_VERSION,
            kind: ReplyKind::Clarification,
            text: text.to_string(),
            attribute: None,
            items: Vec::new(),
            low_confidence: false,
            diagnostics: Diagnostics {
                entropy_bits,
                threshold: dialog.config.decide.threshold,
                ..Diagnostics::default()
            },
        }
    }

    fn card(&self, index: usize, probability: f64) -> ItemCard {
        let item = &self.catalog.items()[index];
        ItemCard {
            id: item.id.clone(),
            title: item.title.join(" "),
            probability,
        }
    }

    /// Free-text turns go through the rewriter when enabled; unknown words
    /// are dropped from the rewrite and an empty rewrite falls back to the input.
    fn interpret(&self, session: &Session, tokens: Vec<String>) -> Result<Vec<String>, ServiceError> {
        match (&self.rewriter, session.rewrite, &session.dialog.pending) {
            (Some(rw), true, None) => {
                let (words, _) = rw.rewrite(&tokens).map_err(ProbeError::from)?;
                let kept: Vec<String> = words.into_iter().filter(|w| w != UNK).collect();
                Ok(if kept.is_empty() { tokens } else { kept })
            }
            _ => Ok(tokens),
        }
    }

    fn respond(&self, session: &mut Session, text: &str) -> Result<BotReply, ServiceError> {
        let entropy_now = posterior_entropy(&session.dialog)?;
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Ok(Self::clarification(&session.dialog, ASK_AGAIN, entropy_now));
        }
        let matched_value = match (&session.dialog.pending, session.dialog.config.answer_mode) {
            (Some(attr), AnswerMode::AttributeExact) => Some(match_answer(&self.catalog, attr, &tokens)?.to_string()),
            _ => None,
        };
        let used = self.interpret(session, tokens)?;
        let likelihood: &dyn ItemLikelihood = &self.scorer;
        let mut dialog = session.dialog.clone();
        match dialog.observe(&self.catalog, &used, Some(likelihood)) {
            Ok(()) => {}
            Err(ProbeError::DegeneratePosterior) => {
                return Ok(Self::clarification(&session.dialog, NO_MATCH, entropy_now));
            }
            Err(e) => return Err(e.into()),
        }
        let decision = dialog.next_decision(&self.catalog)?;
        session.dialog = dialog;

        let mut diagnostics = Diagnostics {
            entropy_bits: decision.entropy_before,
            threshold: decision.threshold,
            gain: None,
            interpreted_as: used,
            matched_value,
        };
        Ok(match decision.kind {
            DecisionKind::Ask {
                attribute,
                question,
                gain,
            } => {
                diagnostics.gain = Some(gain);
                BotReply {
                    v: API_VERSION,
                    kind: ReplyKind::Question,
                    text: question,
                    attribute: Some(attribute),
                    items: Vec::new(),
                    low_confidence: false,
                    diagnostics,
                }
            }
            DecisionKind::Recommend { items, low_confidence } => {
                let cards: Vec<ItemCard> = items.iter().map(|r| self.card(r.index, r.probability)).collect();
                let titles: Vec<&str> = cards.iter().map(|c| c.title.as_str()).collect();
                let text = if low_confidence {
                    format!("I can't narrow it down further. Closest matches: {}.", titles.join("; "))
                } else {
                    format!("You might like: {}.", titles.join("; "))
                };
                BotReply {
                    v: API_VERSION,
                    kind: ReplyKind::Recommendation,
                    text,
                    attribute: None,
                    items: cards,
                    low_confidence,
                    diagnostics,
                }
            }
        })
    }

    pub fn get_posterior(&self, id: &str) -> Result<PosteriorSnapshot, ServiceError> {
        let handle = self.session(id)?;
        let session = handle.lock().unwrap_or_else(|p| p.into_inner());
        let dialog = &session.dialog;
        Ok(PosteriorSnapshot {
            v: API_VERSION,
            session: session.id.clone(),
            entropy_bits: posterior_entropy(dialog)?,
            items: dialog
                .state
                .ranked(&self.catalog)
                .into_iter()
                .map(|(i, p)| self.card(i, p))
                .collect(),
            asked: dialog.asked.iter().cloned().collect(),
            pending_question: dialog.pending.clone(),
            inputs: dialog.state.inputs.len(),
        })
    }

    pub fn transcript(&self, id: &str) -> Result<Vec<TranscriptEntry>, ServiceError> {
        let handle = self.session(id)?;
        let session = handle.lock().unwrap_or_else(|p| p.into_inner());
        Ok(session.transcript.clone())
    }

    /// The session's dialog state (posterior, asked attributes, pending question).
    pub fn dialog(&self, id: &str) -> Result<Dialog, ServiceError> {
        let handle = self.session(id)?;
        let session = handle.lock().unwrap_or_else(|p| p.into_inner());
        Ok(session.dialog.clone())
    }

    /// Rebuild a session by feeding its recorded user turns through again;
    /// every regenerated reply must equal the recorded one.
    fn restore(&self, id: &str, lines: &[StoredLine]) -> Result<(), ServiceError> {
        let (config, rewrite) = match lines.first() {
            Some(StoredLine::Session { config, rewrite, .. }) => (config.clone(), *rewrite),
            _ => return Err(ServiceError::Store(format!("transcript {id} has no session header"))),
        };
        let mut session = Session {
            id: id.to_string(),
            dialog: Dialog::new(&self.catalog, config)?,
            rewrite,
            transcript: Vec::new(),
        };
        let turns: Vec<&TranscriptEntry> = lines[1..]
            .iter()
            .filter_map(|l| match l {
                StoredLine::Turn(t) => Some(t),
                StoredLine::Session { .. } => None,
            })
            .collect();
        let mut user_turn = 0;
        for pair in turns.chunks(2) {
            let [user, bot] = pair else { break };
            let reply = self.respond(&mut session, &user.text)?;
            if bot.reply.as_ref() != Some(&reply) {
                return Err(ServiceError::ReplayMismatch {
                    session: id.to_string(),
                    turn: user_turn,
                });
            }
            session.transcript.push((*user).clone());
            session.transcript.push((*bot).clone());
            user_turn += 1;
        }
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(id.to_string(), Arc::new(Mutex::new(session)));
        Ok(())
    }
}
