use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = etacert_cli::Cli::parse();
    let invocation = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let mut out = std::io::stdout().lock();
    match etacert_cli::run(&cli, &invocation, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
