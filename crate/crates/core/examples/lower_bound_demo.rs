//! Lower-bound constructions: iterations spent crossing the runway, and the
//! step-size threshold above which constant-step GD blows up.
//!
//!     cargo run --release --example lower_bound_demo

use warmup_lab::harness::{lower_bound_demo, runway_count};

fn main() -> warmup_lab::Result<()> {
    println!("{}", lower_bound_demo()?.to_markdown());

    // the count grows like 1/ε² as the runway lengthens
    println!("| ε | measured | lower bound |\n|---|---|---|");
    for eps in [0.1, 0.05, 0.02] {
        let r = runway_count(1.0, 2.0, eps)?;
        println!("| {eps} | {:?} | {:.1} |", r.measured, r.predicted);
    }
    Ok(())
}
