//! The loss-clipped warm-up on a WSD schedule with no warm-up phase of its
//! own: C controls how long the effective step stays below the base step.
//!
//!     cargo run --release --example practical_warmup

use warmup_lab::harness::practical_warmup;

fn main() -> warmup_lab::Result<()> {
    let r = practical_warmup()?;
    println!("{}", r.to_markdown());
    let csv = std::env::temp_dir().join("effective_lr.csv");
    std::fs::write(&csv, r.steps_csv())?;
    println!("effective step-size traces: {}", csv.display());
    Ok(())
}
