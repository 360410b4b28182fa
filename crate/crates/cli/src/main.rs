use clap::Parser;
use freenormal_cli::{run, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    // program name without its install path, so outputs do not depend on it
    let command_line = std::iter::once("freenormal".to_string()).chain(std::env::args().skip(1)).collect::<Vec<_>>().join(" ");
    match run(&cli, &command_line) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
