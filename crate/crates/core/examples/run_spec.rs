//! Runs a spec file through the same pipeline as the command-line tool.
//!
//! `cargo run --example run_spec -- specs/flat.toml /tmp/report.json`

fn main() {
    let mut args = std::env::args().skip(1);
    let spec = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/specs/flat.toml").to_string());
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("parahermitian_report.json").display().to_string());
    let code = parahermitian::cli::run(spec.as_ref(), out.as_ref(), false);
    println!("report written to {out} (exit code {code})");
    std::process::exit(code);
}
