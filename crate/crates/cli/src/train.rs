use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde_json::json;

use seqprobe::seq2seq::Attention;
use seqprobe::training::{PairCorpus, TrainConfig, Trainer, STATE_FILE};

use crate::{read_input, usage, write_json, Format, FormatArg};

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Corpus file (`source<TAB>target` per line), `-` for stdin
    #[arg(long)]
    pub corpus: PathBuf,
    /// Directory for model.json and train_state.json, written after every epoch
    #[arg(long)]
    pub out: PathBuf,
    /// none, dot, general, concat or tensor[:k]
    #[arg(long, default_value = "general")]
    pub attention: Attention,
    #[arg(long, default_value_t = 32)]
    pub d_emb: usize,
    /// Decoder hidden size (even); each encoder direction gets half
    #[arg(long, default_value_t = 64)]
    pub d_h: usize,
    #[arg(long, default_value_t = 1)]
    pub enc_layers: usize,
    #[arg(long, default_value_t = 1)]
    pub dec_layers: usize,
    /// Source vocabulary size including the three reserved tokens
    #[arg(long, default_value_t = 30_000)]
    pub src_vocab: usize,
    #[arg(long, default_value_t = 30_000)]
    pub tgt_vocab: usize,
    #[arg(long, default_value_t = 20)]
    pub max_decode_len: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Global gradient-norm clip
    #[arg(long, default_value_t = 5.0)]
    pub clip_norm: f64,
    /// Continue from the state saved in --out (architecture flags are ignored)
    #[arg(long)]
    pub resume: bool,
    #[command(flatten)]
    pub format: FormatArg,
}

pub fn run(a: TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let text = read_input(&a.corpus)?;
    let corpus = PairCorpus::read(text.as_bytes(), &a.corpus.display().to_string())?;
    let mut trainer = if a.resume {
        if !a.out.join(STATE_FILE).exists() {
            return Err(usage(format!("--resume: no {STATE_FILE} in {}", a.out.display())));
        }
        let mut state = Trainer::load_state(&a.out)?;
        state.config.epochs = a.epochs;
        Trainer::resume(&corpus, state)?
    } else {
        let config = TrainConfig {
            src_vocab_cap: a.src_vocab,
            tgt_vocab_cap: a.tgt_vocab,
            d_emb: a.d_emb,
            d_h: a.d_h,
            enc_layers: a.enc_layers,
            dec_layers: a.dec_layers,
            attention: a.attention,
            max_decode_len: a.max_decode_len,
            epochs: a.epochs,
            seed: a.seed,
            clip_norm: a.clip_norm,
            ..TrainConfig::default()
        };
        Trainer::new(&corpus, config)?
    };
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    trainer.save(&a.out)?;
    trainer.run(Some(&a.out), |e| {
        let _ = writeln!(err, "epoch {} loss {:.6}", e.epoch, e.mean_token_loss);
    })?;

    let state = trainer.state()?;
    match a.format.format {
        Format::Json => write_json(
            out,
            &json!({
                "command": "train",
                "out": a.out,
                "pairs": corpus.len(),
                "config": state.config,
                "parameters": trainer.bundle().params.param_count(),
                "loss_log": state.loss_log,
            }),
        )?,
        Format::Tsv => {
            writeln!(out, "epoch\tmean_token_loss\tpairs\ttokens")?;
            for e in &state.loss_log {
                writeln!(out, "{}\t{}\t{}\t{}", e.epoch, e.mean_token_loss, e.pairs, e.tokens)?;
            }
        }
    }
    Ok(())
}
