use std::io;
use std::process::ExitCode;

use clap::Parser;
use geoctree::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli, &mut io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geoctree: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
