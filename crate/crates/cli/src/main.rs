//! `shortshift`: the detection pipeline as stage subcommands.

mod args;
mod commands;
mod failure;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use failure::Failure;

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = commands::Context::new(&cli.global)?;
    match cli.command {
        Command::Ingest(a) => commands::ingest(&ctx, a),
        Command::Train(a) => commands::train(&ctx, a),
        Command::Score(a) => commands::score(&ctx, a),
        Command::Variability(a) => commands::variability(&ctx, a),
        Command::Evaluate(a) => commands::evaluate(&ctx, a),
        Command::Synth(a) => commands::synth(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error [{}]: {}", f.stage, f.message);
            ExitCode::from(f.code)
        }
    }
}
