use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use lexdiv_cli::error::{EXIT_OK, EXIT_USAGE};
use lexdiv_cli::{execute, Cli, Outcome};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::from(EXIT_OK as u8),
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    let cwd = match std::env::current_dir() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: cannot read the current directory: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match execute(&cli, &cwd) {
        Ok(Outcome::Text(t)) => {
            print!("{t}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Manifests(ms)) => {
            for m in ms {
                eprintln!("{}: {} inputs, {} outputs, {:.2}s", m.command, m.inputs.len(), m.outputs.len(), m.wall_seconds);
            }
            ExitCode::SUCCESS
        }
        Ok(Outcome::Served) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
