mod args;
mod cmd;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config::Settings::load(cli.config.as_deref()).and_then(|settings| {
        for w in settings.warnings() {
            eprintln!("warning: {w}");
        }
        match cli.command {
            Command::Gen(a) => cmd::gen::run(a, &settings),
            Command::Run(a) => cmd::run::run(a, &settings),
            Command::Sweep(a) => cmd::sweep::run(a, &settings),
            Command::Adversary(a) => cmd::adversary::run(a, &settings),
            Command::Verify(a) => cmd::verify::run(a, &settings),
            Command::StarProb(a) => cmd::star_prob::run(a, &settings),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Verification(_)) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.code())
        }
    }
}
