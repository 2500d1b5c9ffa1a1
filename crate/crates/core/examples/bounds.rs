//! Iteration-count predictions: adaptive upper bounds against constant-step
//! lower bounds as the initial gap grows.
//!
//!     cargo run --release --example bounds

use warmup_lab::theory::{predict_bound, BoundInputs, BoundKind};

fn main() -> warmup_lab::Result<()> {
    let (h0, h1, eps, mu) = (1.0, 1.0, 1e-3, 0.5);
    println!("| Δ0 | upper, aiming | lower, convex | upper, PL | lower, PL |\n|---|---|---|---|---|");
    for delta0 in [1e1, 1e2, 1e3, 1e4] {
        let inputs = BoundInputs {
            h0: Some(h0),
            h1: Some(h1),
            eps: Some(eps),
            theta: Some(1.0),
            // distance consistent with a quadratic bowl of curvature H0
            dist0: Some((2.0 * delta0 / h0).sqrt()),
            delta0: Some(delta0),
            mu: Some(mu),
        };
        let get = |k| predict_bound(k, inputs.clone()).map(|p| p.iters);
        println!(
            "| {delta0:e} | {:.3e} | {:.3e} | {:.3e} | {:.3e} |",
            get(BoundKind::UpperAiming)?,
            get(BoundKind::LowerConvex)?,
            get(BoundKind::UpperPl)?,
            get(BoundKind::LowerPl)?
        );
    }
    Ok(())
}
