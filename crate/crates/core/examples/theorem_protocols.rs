//! Runs a scenario config end to end and writes CSV, report and plots.
//!
//! cargo run --release --example theorem_protocols -- fixtures/reference.toml out/reference

use std::path::PathBuf;

use entcone::harness::{emit_outputs, run_scenario, OutputFormats, ScenarioConfig};

fn main() -> entcone::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "fixtures/reference.toml".into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/reference".into()));
    let cfg = ScenarioConfig::load(&config)?;
    let record = run_scenario(&cfg)?;
    let summary = emit_outputs(&record, &OutputFormats::default(), &out)?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    for v in &record.verdicts {
        println!("{:<28} {}  {}", v.name, if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("{} samples in {:.2} s, outputs in {}", record.samples.len(), record.wall_clock_seconds, out.display());
    Ok(())
}
