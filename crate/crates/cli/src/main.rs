//! `ptdial` command-line tool.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use ptdial::pt::PtMode;

use crate::config::{Overrides, PipelineConfig};

#[derive(Parser)]
#[command(name = "ptdial", version, about = "Sentiment-transition dialogue corpus toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random stage.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Transition probability above which a DOT edge is highlighted.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Sampling pool size.
    #[arg(long, global = true)]
    top_k: Option<usize>,
    /// PT rule: any_increase or must_reach_positive.
    #[arg(long, global = true)]
    mode: Option<PtMode>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the text sentiment predictor on scored reviews.
    TrainSp,
    /// Label the corpus, extract PT dialogues and write statistics.
    Enhance,
    /// Train forward and reverse n-gram models.
    TrainLm,
    /// Generate responses for held-out contexts.
    Respond,
    /// Score responses against references.
    Evaluate,
    /// Run every stage in order and write a manifest.
    Pipeline,
    /// Write synthetic fixtures.
    Synth {
        #[arg(long, default_value_t = 3000)]
        reviews: usize,
        #[arg(long, default_value_t = 600)]
        dialogues: usize,
        #[arg(long, default_value_t = 20)]
        held_out: usize,
        /// Leave emojis out of the dialogue corpus.
        #[arg(long)]
        no_emojis: bool,
    },
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    if let Command::Synth {
        reviews,
        dialogues,
        held_out,
        no_emojis,
    } = cli.command
    {
        return commands::synth_cmd(&commands::SynthOptions {
            out: g.out.unwrap_or_else(|| PathBuf::from("data")),
            seed: g.seed.unwrap_or(7),
            reviews,
            dialogues,
            held_out,
            emojis: !no_emojis,
        });
    }
    let overrides = Overrides {
        seed: g.seed,
        out: g.out,
        threshold: g.threshold,
        top_k: g.top_k,
        mode: g.mode,
    };
    let cfg = PipelineConfig::load(g.config.as_deref(), &overrides)?;
    match cli.command {
        Command::TrainSp => commands::train_sp_cmd(&cfg),
        Command::Enhance => commands::enhance_cmd(&cfg).map(|_| ()),
        Command::TrainLm => commands::train_lm_cmd(&cfg),
        Command::Respond => commands::respond_cmd(&cfg),
        Command::Evaluate => commands::evaluate_cmd(&cfg),
        Command::Pipeline => commands::pipeline_cmd(&cfg),
        Command::Synth { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
