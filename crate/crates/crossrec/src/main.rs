use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = crossrec::cli::Cli::parse();
    let code = crossrec::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}
