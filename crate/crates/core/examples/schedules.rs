//! Step-size policies side by side.
//!
//!     cargo run --release --example schedules

use warmup_lab::schedules::{max_safe_constant_step, step_size, StepPolicy, StepState};

fn main() -> warmup_lab::Result<()> {
    let total = 100;
    let wsd = StepPolicy::wsd_default(0.1, 20, total);
    let policies = [
        ("cosine", StepPolicy::Cosine { peak: 0.1, total_iters: total, floor: 0.0 }),
        ("linear warm-up", StepPolicy::LinearWarmup { peak: 0.1, warmup_iters: 10, total_iters: total, floor: 0.0 }),
        ("wsd", wsd.clone()),
        ("clipped wsd, C = 4", StepPolicy::PracticalClipped { base: Box::new(wsd), c: 4.0 }),
        ("adaptive", StepPolicy::adaptive(1.0, 1.0, 0.0)),
    ];
    // a loss curve decaying from 40 to 0, standing in for training
    let loss = |k: usize| 40.0 * (-(k as f64) / 15.0).exp();
    print!("{:>5} {:>8}", "iter", "loss");
    for (name, _) in &policies {
        print!(" {name:>20}");
    }
    println!();
    for k in (0..total).step_by(10) {
        print!("{k:>5} {:>8.3}", loss(k));
        for (_, p) in &policies {
            print!(" {:>20.5}", step_size(p, &StepState::new(k, loss(k)))?);
        }
        println!();
    }
    println!("\nlargest safe constant step at f(w0) = 40, H1 = 1: {:.5}", max_safe_constant_step(40.0, 1.0)?);
    Ok(())
}
