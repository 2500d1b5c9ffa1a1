//! Config-driven runs: parse a TOML file, execute its sweep, aggregate.
//!
//!     cargo run --release --example run_config -- examples/configs/clipped_sweep.toml

use std::path::PathBuf;

use warmup_lab::harness::{emit_report, run_config, ExperimentConfig};

fn main() -> warmup_lab::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/clipped_sweep.toml")));
    let mut cfg = ExperimentConfig::parse(&std::fs::read_to_string(&path)?)?;
    let out = std::env::temp_dir().join("warmup-lab-example");
    cfg.outputs = Some(out.clone());
    println!("{} run(s) from {}", cfg.sweep_size(), path.display());

    let records = run_config(&cfg, None)?;
    let ids: Vec<String> = records.iter().map(|r| r.run_id.clone()).collect();
    let report = emit_report(&out, &ids)?;
    println!("{}", report.markdown);
    println!("artifacts under {}", out.display());
    Ok(())
}
