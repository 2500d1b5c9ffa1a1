//! Local smoothness measured along SGD, regressed on the training loss.
//!
//!     cargo run --release --example smoothness_vs_loss

use warmup_lab::harness::{smoothness_vs_loss, SmoothnessVsLossSetup};

fn main() -> warmup_lab::Result<()> {
    let r = smoothness_vs_loss(&SmoothnessVsLossSetup::default())?;
    println!("{}", r.to_markdown());

    // a coarse text scatter: mean smoothness per loss decile
    let (lo, hi) = r.samples.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), s| (a.min(s.loss_gap), b.max(s.loss_gap)));
    let mut bins = vec![(0.0, 0usize); 10];
    for s in &r.samples {
        let i = (((s.loss_gap - lo) / (hi - lo) * 10.0) as usize).min(9);
        bins[i].0 += s.smoothness;
        bins[i].1 += 1;
    }
    for (i, (sum, n)) in bins.iter().enumerate() {
        if *n > 0 {
            let mid = lo + (i as f64 + 0.5) * (hi - lo) / 10.0;
            let mean = sum / *n as f64;
            println!("loss ≈ {mid:>8.1}  smoothness {mean:>8.2}  {}", "#".repeat((mean / 50.0).ceil() as usize));
        }
    }
    Ok(())
}
