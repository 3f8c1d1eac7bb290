use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

/// Run the suites named in a spec file and write a JSON report.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Run spec (TOML).
    spec: PathBuf,
    /// Where to write the JSON report.
    output: PathBuf,
    /// Print every witness, including those of passing suites.
    #[arg(short, long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    ExitCode::from(parahermitian::cli::run(&args.spec, &args.output, args.verbose) as u8)
}
