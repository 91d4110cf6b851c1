#![allow(clippy::neg_cmp_op_on_partial_ord)]
mod args;
mod commands;
mod config;
mod error;
mod manifest;
mod selftest;

use std::ffi::OsString;
use std::time::Instant;

use args::Command;
use config::{ParseFailure, Resolved};
use error::CliError;

fn main() {
    std::process::exit(run(std::env::args_os().collect()));
}

fn run(argv: Vec<OsString>) -> i32 {
    let Resolved { cli, params } = match config::resolve(argv) {
        Ok(r) => r,
        Err(ParseFailure::Clap(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(ParseFailure::Config(e)) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match execute(&cli, &params) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &args::Cli, params: &std::collections::BTreeMap<String, String>) -> Result<i32, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::invalid(format!("--threads: {e}")))?;
    let out = commands::prepare_out(&cli.out)?;
    let started = std::time::SystemTime::now();
    let clock = Instant::now();
    let outcome = pool.install(|| match &cli.command {
        Command::Manifold(a) => commands::manifold(a, &out),
        Command::Srb(a) => commands::srb(a, &out),
        Command::Periodic(a) => commands::periodic(a, &out),
        Command::Stats(a) => commands::stats(a, &out),
        Command::Compare(a) => commands::compare(a, &out),
        Command::Selftest(a) => selftest::selftest(a, &out),
    })?;
    let run = manifest::Run {
        subcommand: cli.command.name(),
        params,
        outcome: &outcome,
        started,
        wall_time: clock.elapsed(),
    };
    manifest::write(&out, &run)?;
    Ok(outcome.exit_code)
}
