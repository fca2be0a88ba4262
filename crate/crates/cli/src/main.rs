mod cli;
mod commands;
mod manifest;
mod reproduce;

use std::process::ExitCode;

use chordlen::Error;
use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use cli::{Cli, Command};

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        Error::Domain(_) | Error::Validation(_) => 2,
        Error::Accuracy { .. } => 3,
    }
}

fn error_json(e: &Error) -> serde_json::Value {
    match e {
        Error::Domain(m) => json!({ "kind": "domain", "message": m }),
        Error::Validation(m) => json!({ "kind": "validation", "message": m }),
        Error::Io(m) => json!({ "kind": "io", "message": m }),
        Error::Accuracy {
            message,
            estimate,
            error_bound,
        } => json!({
            "kind": "accuracy",
            "message": message,
            "estimate": estimate,
            "error_bound": error_bound,
        }),
    }
}

fn run(cli: &Cli) -> chordlen::Result<()> {
    match &cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Extract(a) => commands::extract(a),
        Command::Detect(a) => commands::detect(a),
        Command::Curves(a) => commands::curves(a),
        Command::Reproduce(a) => reproduce::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": "usage", "message": e.to_string().trim_end() } }));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": error_json(&e) }));
            ExitCode::from(exit_code(&e))
        }
    }
}
