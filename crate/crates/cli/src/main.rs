mod args;
mod commands;
mod settings;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use loewner_lab::report::write_atomic;
use loewner_lab::LabError;

use args::Cli;
use settings::{at_least, ParamError, Settings};

const EXIT_PARAM: u8 = 2;
const EXIT_CHECK: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ParamError>().is_some() {
        return EXIT_PARAM;
    }
    match e.downcast_ref::<LabError>() {
        Some(l) if l.is_parameter_error() => EXIT_PARAM,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let flags = cli.settings();
    let mut s = match &cli.common.config {
        Some(path) => flags.over(Settings::from_file(path)?),
        None => flags,
    };
    s.resolve_seed()?;
    if let Some(w) = s.workers {
        at_least("workers", w, 1)?;
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global()?;
    }

    let outcome = commands::run(cli.name(), &s)?;
    match &s.out {
        Some(path) => {
            write_atomic(path, outcome.text.as_bytes())?;
            println!("{}", outcome.summary);
        }
        None => {
            print!("{}", outcome.text);
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(if outcome.failed {
        ExitCode::from(EXIT_CHECK)
    } else {
        ExitCode::SUCCESS
    })
}
