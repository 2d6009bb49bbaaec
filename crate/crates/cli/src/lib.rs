//! The `seqprobe` command line.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod eval;
mod infer;
mod serve;
mod sim;
mod train;

#[derive(Parser, Debug)]
#[command(name = "seqprobe", version, about = "Seq2seq likelihood models and an attribute-asking recommender")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model on a tab-separated corpus of (source, target) pairs
    Train(train::TrainArgs),
    /// Greedily rewrite each input line
    Rewrite(infer::RewriteArgs),
    /// Score `query<TAB>candidate` lines by ln Pr(query | candidate)
    Score(infer::ScoreArgs),
    /// BLEU of `candidate<TAB>reference...` lines
    EvalBleu(eval::BleuArgs),
    /// AUC of `score<TAB>label` or `query<TAB>item<TAB>label` lines
    EvalAuc(eval::AucArgs),
    /// Simulate dialogs with a truthful user and report questions asked
    ProbeSim(sim::SimArgs),
    /// Run the HTTP chat service
    Serve(serve::ServeArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Tsv,
}

#[derive(Args, Debug, Clone)]
pub struct FormatArg {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Bad flag combinations found after parsing; exits with status 2.
#[derive(Debug)]
pub(crate) struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// File contents, or standard input for `-`.
pub(crate) fn read_input(path: &PathBuf) -> anyhow::Result<String> {
    use anyhow::Context;
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub(crate) fn write_json(out: &mut dyn Write, value: &impl serde::Serialize) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Parse `args` (program name first) and run; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let result = match cli.command {
        Command::Train(a) => train::run(a, out, err),
        Command::Rewrite(a) => infer::rewrite(a, out),
        Command::Score(a) => infer::score(a, out),
        Command::EvalBleu(a) => eval::bleu(a, out),
        Command::EvalAuc(a) => eval::auc(a, out),
        Command::ProbeSim(a) => sim::run(a, out),
        Command::Serve(a) => serve::run(a, err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}
