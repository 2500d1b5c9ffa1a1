//! Adaptive (H0,H1) warm-up against constant steps near the largest safe
//! constant step on the exp-quadratic.
//!
//!     cargo run --release --example warmup_vs_constant

use warmup_lab::harness::warmup_vs_constant;

fn main() -> warmup_lab::Result<()> {
    for log_m in [3.0, 5.0] {
        println!("{}", warmup_vs_constant(log_m, 1e-3)?.to_markdown());
    }
    Ok(())
}
