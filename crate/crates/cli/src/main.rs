use std::process::ExitCode;

use clap::Parser;

use graphbell_cli::{configure_workers, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_workers(cli.workers);
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.text);
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource_cap() { 3 } else { 2 })
        }
    }
}
