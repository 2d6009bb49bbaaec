use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;

use seqprobe::checkpoint::ModelBundle;
use seqprobe::probe::{AnswerMode, Catalog, DecideConfig, DialogConfig, DEFAULT_ANSWER_EPS};
use seqprobe_service::{ChatService, ServeOptions, ServiceConfig, TranscriptStore};

use crate::usage;

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, env = "SEQPROBE_HOST", default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, env = "SEQPROBE_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Catalog in JSON Lines
    #[arg(long, env = "SEQPROBE_CATALOG")]
    pub catalog: PathBuf,
    /// Scorer model giving ln Pr(text | item title)
    #[arg(long, env = "SEQPROBE_CHECKPOINT")]
    pub checkpoint: PathBuf,
    /// Optional rewriter applied to free-text turns
    #[arg(long, env = "SEQPROBE_REWRITER")]
    pub rewriter: Option<PathBuf>,
    /// Skip rewriting even when a rewriter is loaded
    #[arg(long)]
    pub no_rewrite: bool,
    /// Entropy threshold in bits
    #[arg(long, env = "SEQPROBE_THRESHOLD", default_value_t = 1.0)]
    pub threshold: f64,
    #[arg(long, env = "SEQPROBE_TOP_K", default_value_t = 3)]
    pub top_k: usize,
    /// attribute-exact or sequence-likelihood
    #[arg(long, env = "SEQPROBE_ANSWER_MODE", default_value = "attribute-exact")]
    pub answer_mode: AnswerMode,
    #[arg(long, default_value_t = DEFAULT_ANSWER_EPS)]
    pub answer_eps: f64,
    /// Name clients may pass as `catalog` when creating a session
    #[arg(long, default_value = "default")]
    pub catalog_name: String,
    /// Append transcripts here and restore them on start
    #[arg(long, env = "SEQPROBE_TRANSCRIPTS")]
    pub transcripts: Option<PathBuf>,
    /// Browser origin allowed by CORS; any origin when unset
    #[arg(long, env = "SEQPROBE_CORS_ORIGIN")]
    pub cors_origin: Option<String>,
}

pub fn run(a: ServeArgs, err: &mut dyn Write) -> anyhow::Result<()> {
    if a.top_k == 0 {
        return Err(usage("--top-k must be at least 1"));
    }
    if !(a.threshold.is_finite() && a.threshold >= 0.0) {
        return Err(usage("--threshold must be finite and >= 0"));
    }
    let catalog = Catalog::load(&a.catalog)?;
    let scorer = ModelBundle::load(&a.checkpoint)?;
    let rewriter = a.rewriter.as_ref().map(|p| ModelBundle::load(p)).transpose()?;
    let config = ServiceConfig {
        catalog_name: a.catalog_name,
        dialog: DialogConfig {
            decide: DecideConfig {
                threshold: a.threshold,
                top_k: a.top_k,
                ..DecideConfig::default()
            },
            answer_mode: a.answer_mode,
            answer_eps: a.answer_eps,
        },
        rewrite: !a.no_rewrite,
    };
    let mut service = ChatService::new(catalog, scorer, rewriter, config);
    if let Some(dir) = &a.transcripts {
        service = service.with_store(TranscriptStore::open(dir)?)?;
    }
    let options = ServeOptions {
        addr: SocketAddr::new(a.host, a.port),
        cors_origin: a.cors_origin,
    };
    writeln!(err, "listening on http://{}", options.addr)?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(seqprobe_service::serve(Arc::new(service), options))?;
    Ok(())
}
