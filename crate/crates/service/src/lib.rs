//! Chat sessions over a catalog: free text is scored against item titles,
//! attribute questions narrow the posterior, and confident posteriors turn
//! into recommendations. Exposed over HTTP with JSON payloads.

mod http;
mod reply;
mod service;
mod store;

pub use http::{router, serve, ServeOptions};
pub use reply::{BotReply, Diagnostics, ItemCard, PosteriorSnapshot, ReplyKind, Role, SessionCreated, TranscriptEntry};
pub use service::{ChatService, ServiceConfig, ServiceError, SessionOverrides};
pub use store::TranscriptStore;

/// Schema version carried as `"v"` in every payload.
pub const API_VERSION: u32 = 1;
