//! `trivopt`: reproducible benchmarks and verification suites for
//! trivialised manifold optimisation.

mod commands;
mod config;

use clap::error::ErrorKind;
use clap::Parser;

use config::{CliCommand, RawArgs};

/// Exit codes: 0 success, 1 check or I/O failure, 2 divergence, 64
/// config error.
fn run() -> i32 {
    let raw = match RawArgs::try_parse() {
        Ok(raw) => raw,
        Err(err) => {
            let usage_request = matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if usage_request { 0 } else { 64 };
        }
    };

    if let Ok(threads) = std::env::var("TRIVOPT_THREADS") {
        match threads.trim().parse::<usize>() {
            Ok(t) if t >= 1 => {
                // a failure here means a pool already exists, which only
                // happens in-process under tests; the cap still applies
                // to the pool that won
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!(
                    "config error: malformed value for `TRIVOPT_THREADS`: `{threads}` (expected a positive integer)"
                );
                return 64;
            }
        }
    }

    let cfg = match config::resolve(raw) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("config error: {err}");
            return 64;
        }
    };

    // echo the effective configuration in replayable key = value form
    print!("{cfg}");

    let outcome = match cfg.command {
        CliCommand::Bench => commands::bench(&cfg),
        CliCommand::Verify => commands::verify(&cfg),
        CliCommand::ExpmBench => commands::expm_bench(&cfg),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("i/o error writing `{}`: {err}", cfg.out.display());
            1
        }
    }
}

fn main() {
    std::process::exit(run());
}
