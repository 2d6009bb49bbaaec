use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use seqprobe::checkpoint::ModelBundle;
use seqprobe::training::text::tokenize;

use crate::{read_input, usage, Format, FormatArg};

#[derive(Args, Debug)]
pub struct RewriteArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// One source per line, `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: PathBuf,
    #[command(flatten)]
    pub format: FormatArg,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// `query<TAB>candidate` per line, `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: PathBuf,
    #[command(flatten)]
    pub format: FormatArg,
}

pub fn rewrite(a: RewriteArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let model = ModelBundle::load(&a.model)?;
    for (n, line) in read_input(&a.input)?.lines().enumerate() {
        let tokens = tokenize(line);
        if tokens.is_empty() {
            return Err(usage(format!("line {}: nothing to rewrite", n + 1)));
        }
        let (words, r) = model.rewrite(&tokens)?;
        match a.format.format {
            Format::Tsv => writeln!(out, "{}", words.join(" "))?,
            Format::Json => writeln!(
                out,
                "{}",
                json!({
                    "source": line,
                    "rewrite": words.join(" "),
                    "termination": r.termination,
                    "probabilities": r.probabilities,
                })
            )?,
        }
    }
    Ok(())
}

pub fn score(a: ScoreArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let model = ModelBundle::load(&a.model)?;
    if a.format.format == Format::Tsv {
        writeln!(out, "log_likelihood\tnormalized\tlength")?;
    }
    for (n, line) in read_input(&a.input)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((query, candidate)) = line.split_once('\t') else {
            return Err(usage(format!("line {}: expected query<TAB>candidate", n + 1)));
        };
        let (q, c) = (tokenize(query), tokenize(candidate));
        if q.is_empty() || c.is_empty() {
            return Err(usage(format!("line {}: empty query or candidate", n + 1)));
        }
        let s = model.score(&c, &q)?;
        match a.format.format {
            Format::Tsv => writeln!(out, "{}\t{}\t{}", s.log_likelihood, s.normalized, s.length)?,
            Format::Json => writeln!(
                out,
                "{}",
                json!({
                    "query": query,
                    "candidate": candidate,
                    "log_likelihood": s.log_likelihood,
                    "normalized": s.normalized,
                    "length": s.length,
                })
            )?,
        }
    }
    Ok(())
}
