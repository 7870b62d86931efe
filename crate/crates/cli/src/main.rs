use std::process::ExitCode;

use clap::Parser;
use qstrange_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(m) => {
            eprintln!(
                "{}: wrote {} artifacts to {} in {:.2}s",
                cli.command.name(),
                m.artifacts.len(),
                cli.command.out().display(),
                m.duration_seconds
            );
            println!("{}", serde_json::Value::Object(m.results));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
