use std::io::Write;

use clap::Parser;
use layered_kac::commands::{execute, Cli, EXIT_USAGE};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            std::process::exit(outcome.exit_code());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
