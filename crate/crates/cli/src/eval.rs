use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use seqprobe::checkpoint::ModelBundle;
use seqprobe::eval::{auc_counts, corpus_bleu, read_auc_rows, read_bleu_rows, AucRow, DEFAULT_MAX_N};

use crate::{read_input, usage, write_json, Format, FormatArg};

#[derive(Args, Debug)]
pub struct BleuArgs {
    /// `candidate<TAB>reference[<TAB>reference...]` per line, `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Pool n-gram counts over the corpus instead of averaging sentence scores
    #[arg(long)]
    pub pooled: bool,
    #[command(flatten)]
    pub format: FormatArg,
}

#[derive(Args, Debug)]
pub struct AucArgs {
    /// `score<TAB>label` or `query<TAB>item<TAB>label` per line, `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: PathBuf,
    /// Scorer for `query<TAB>item<TAB>label` rows
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Rank by per-token log-likelihood instead of the raw sum
    #[arg(long)]
    pub normalized: bool,
    #[command(flatten)]
    pub format: FormatArg,
}

fn report(out: &mut dyn Write, format: Format, fields: &[(&str, serde_json::Value)]) -> anyhow::Result<()> {
    match format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> =
                fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
            write_json(out, &map)
        }
        Format::Tsv => {
            let flat: Vec<&(&str, serde_json::Value)> = fields.iter().filter(|(_, v)| !v.is_object()).collect();
            let header: Vec<&str> = flat.iter().map(|(k, _)| *k).collect();
            let row: Vec<String> = flat
                .iter()
                .map(|(_, v)| match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            writeln!(out, "{}\n{}", header.join("\t"), row.join("\t"))?;
            Ok(())
        }
    }
}

pub fn bleu(a: BleuArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let rows = read_bleu_rows(&read_input(&a.input)?)?;
    let pairs: Vec<(Vec<String>, Vec<Vec<String>>)> = rows.into_iter().map(|r| (r.candidate, r.references)).collect();
    let score = corpus_bleu(&pairs, a.max_n, a.pooled)?;
    report(
        out,
        a.format.format,
        &[
            ("metric", json!("bleu")),
            ("count", json!(pairs.len())),
            ("score", json!(score)),
            ("config", json!({ "max_n": a.max_n, "pooled": a.pooled, "input": a.input })),
        ],
    )
}

pub fn auc(a: AucArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let rows = read_auc_rows(&read_input(&a.input)?)?;
    let model = a.model.as_ref().map(|p| ModelBundle::load(p)).transpose()?;
    let mut scored = Vec::with_capacity(rows.len());
    for row in rows {
        match row {
            AucRow::Scored { score, label } => scored.push((score, label.is_positive())),
            AucRow::Pair(p) => {
                let Some(m) = &model else {
                    return Err(usage("query<TAB>item<TAB>label rows need --model"));
                };
                let s = m.score(&p.item, &p.query)?;
                let v = if a.normalized { s.normalized } else { s.log_likelihood };
                scored.push((v, p.label.is_positive()));
            }
        }
    }
    let c = auc_counts(&scored)?;
    report(
        out,
        a.format.format,
        &[
            ("metric", json!("auc")),
            ("count", json!(scored.len())),
            ("positives", json!(c.positives)),
            ("negatives", json!(c.negatives)),
            ("auc", json!(c.value())),
            (
                "config",
                json!({ "input": a.input, "model": a.model, "normalized": a.normalized }),
            ),
        ],
    )
}
