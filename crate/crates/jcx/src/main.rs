use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use jcx::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let status = run(&cli, &mut out);
    let _ = out.flush();
    match status {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jcx: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
