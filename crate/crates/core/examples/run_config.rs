//! Drive the whole pipeline from a configuration file, as the binary does.
//!
//! `cargo run --release --example run_config -- crates/core/examples/configs/generic.toml`

use std::path::PathBuf;

use freebound::config::parse_config;
use freebound::pipeline::run_pipeline;

fn main() -> freebound::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/trivial.toml")));
    let cfg = parse_config(&path)?;
    let report = run_pipeline(&cfg)?;
    println!("status {:?} (exit code {})", report.status, report.status.exit_code());
    for a in &report.artifacts {
        println!("  {}", a.display());
    }
    Ok(())
}
