use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qcp_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = run(cli, &mut std::io::stdin().lock());
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    if !out.stderr.is_empty() {
        let _ = writeln!(std::io::stderr(), "qcp: {}", out.stderr);
    }
    ExitCode::from(out.code as u8)
}
