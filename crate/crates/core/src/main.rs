use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use oil::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok((code, text)) => {
            if let Some(text) = text {
                let mut out = std::io::stdout().lock();
                if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("oil: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
