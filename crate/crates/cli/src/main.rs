use std::io::Write;

use clap::Parser;
use tdbie_cli::{run, Cli, CliError};

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli, &argv) {
        Ok(lines) => {
            let mut out = std::io::stdout().lock();
            for l in lines {
                // a closed pipe is not an error of the run
                if writeln!(out, "{l}").is_err() {
                    break;
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("run `tdbie --help` for usage");
            }
            std::process::exit(e.status());
        }
    }
}
