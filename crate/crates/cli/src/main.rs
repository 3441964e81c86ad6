#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod output;
mod params;
mod snapshot;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Context;
use error::CliError;
use params::*;

fn run(cli: Cli) -> Result<(), CliError> {
    let config = read_config(cli.global.config.as_deref())?;
    let ctx = Context {
        constants_path: commands::snapshot_path(&cli.global.out, cli.global.constants.as_deref()),
        out: cli.global.out,
        config,
        recompute: cli.global.recompute_constants,
    };
    match cli.command {
        Command::Townes(a) => commands::townes(&ctx, merge::<SolitonParams, _>(&ctx.config, &a)?),
        Command::Constants(a) => commands::constants(&ctx, merge::<SolitonParams, _>(&ctx.config, &a)?),
        Command::Simulate(a) => commands::simulate(&ctx, merge::<ModelParams, _>(&ctx.config, &a)?),
        Command::Classify(a) => commands::classify_cmd(&ctx, merge::<ModelParams, _>(&ctx.config, &a)?),
        Command::Threshold(a) => commands::threshold(&ctx, merge::<ThresholdParams, _>(&ctx.config, &a)?),
        Command::F1Table(a) => commands::f1_table(&ctx, merge::<F1TableParams, _>(&ctx.config, &a)?),
        Command::Sweep(a) => commands::sweep(&ctx, merge::<SweepParams, _>(&ctx.config, &a)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("shmod: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
