mod args;
mod commands;
mod demo;
mod input;
mod pretty;
mod report;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use args::{Cli, Command, Output};
use commands::Outcome;
use report::Verdict;

fn emit(outcome: Outcome, output: &Output) -> Result<Verdict> {
    let text = serde_json::to_string_pretty(&outcome.report)? + "\n";
    if let Some(path) = &output.out {
        input::write_file(path, &text)?;
    }
    if output.pretty {
        print!("{}", outcome.table);
    } else {
        print!("{text}");
    }
    Ok(outcome.verdict)
}

fn run(cli: Cli) -> Result<Verdict> {
    match cli.command {
        Command::State(a) => commands::state(&a),
        Command::Inclusion(a) => emit(commands::inclusion(&a)?, &a.output),
        Command::Certify(a) => emit(commands::certify(&a)?, &a.output),
        Command::Sweep(a) => emit(commands::sweep(&a)?, &a.output),
        Command::Demo(a) => emit(demo::run(&a)?, &a.output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Verdict::Error as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(v) => ExitCode::from(v as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Verdict::Error as u8)
        }
    }
}
