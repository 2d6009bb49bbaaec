use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use seqprobe::probe::{simulate_trials, Catalog, DecideConfig, DialogConfig, DEFAULT_ANSWER_EPS};
use seqprobe::synthetic::bisection_catalog;

use crate::{usage, write_json, Format, FormatArg};

#[derive(Args, Debug)]
pub struct SimArgs {
    /// Catalog in JSON Lines
    #[arg(long, conflicts_with = "bisection")]
    pub catalog: Option<PathBuf>,
    /// Use a generated catalog of 2^N items split by N yes/no attributes
    #[arg(long, value_name = "N")]
    pub bisection: Option<u32>,
    /// Entropy threshold in bits; repeat to compare several
    #[arg(long = "threshold", default_values_t = [1.0])]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Likelihood given to items that disagree with an answer
    #[arg(long, default_value_t = DEFAULT_ANSWER_EPS)]
    pub answer_eps: f64,
    /// Include every trial in the JSON report
    #[arg(long)]
    pub details: bool,
    #[command(flatten)]
    pub format: FormatArg,
}

pub fn run(a: SimArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let (catalog, source) = match (&a.catalog, a.bisection) {
        (Some(p), None) => (Catalog::load(p)?, p.display().to_string()),
        (None, Some(bits)) if (1..=16).contains(&bits) => (bisection_catalog(bits), format!("bisection:{bits}")),
        (None, Some(bits)) => return Err(usage(format!("--bisection must be in 1..=16, got {bits}"))),
        _ => return Err(usage("give --catalog or --bisection")),
    };
    if a.top_k == 0 {
        return Err(usage("--top-k must be at least 1"));
    }
    if !(a.answer_eps > 0.0 && a.answer_eps < 1.0) {
        return Err(usage("--answer-eps must be in (0, 1)"));
    }
    let mut runs = Vec::new();
    for &threshold in &a.thresholds {
        if !(threshold.is_finite() && threshold >= 0.0) {
            return Err(usage(format!("--threshold must be finite and >= 0, got {threshold}")));
        }
        let config = DialogConfig {
            decide: DecideConfig {
                threshold,
                top_k: a.top_k,
                ..DecideConfig::default()
            },
            answer_eps: a.answer_eps,
            ..DialogConfig::default()
        };
        runs.push(simulate_trials(&catalog, &config, a.trials, a.seed)?);
    }
    match a.format.format {
        Format::Json => {
            let runs: Vec<serde_json::Value> = runs
                .iter()
                .map(|r| {
                    let mut v = json!({
                        "threshold": r.threshold,
                        "trials": r.trials,
                        "mean_questions": r.mean_questions,
                        "identified": r.identified,
                        "questions_histogram": r.questions_histogram,
                    });
                    if a.details {
                        v["outcomes"] = json!(r.outcomes);
                    }
                    v
                })
                .collect();
            write_json(
                out,
                &json!({
                    "command": "probe-sim",
                    "catalog": source,
                    "items": catalog.len(),
                    "seed": a.seed,
                    "top_k": a.top_k,
                    "answer_eps": a.answer_eps,
                    "runs": runs,
                }),
            )
        }
        Format::Tsv => {
            writeln!(out, "threshold\ttrials\tmean_questions\tidentified\tquestions_histogram")?;
            for r in &runs {
                let hist: Vec<String> = r.questions_histogram.iter().map(|(q, n)| format!("{q}:{n}")).collect();
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    r.threshold,
                    r.trials,
                    r.mean_questions,
                    r.identified,
                    hist.join(",")
                )?;
            }
            Ok(())
        }
    }
}
