//! Closure of the (H0,H1) class under sums and affine maps, plus functions
//! that are (H0,H1)-smooth but not (L0,L1)-smooth.
//!
//!     cargo run --release --example closure_demo

use warmup_lab::harness::closure_demo;
use warmup_lab::theory::{l0l1_to_h0h1, nu};

fn main() -> warmup_lab::Result<()> {
    println!("{}", closure_demo(500)?.to_markdown());

    println!("(L0,L1) → (H0,H1), ν = {:.12}", nu());
    for (l0, l1) in [(1.0, 0.5), (1.0, 1.0), (2.0, 4.0)] {
        let (h0, h1) = l0l1_to_h0h1(l0, l1)?;
        println!("  L0 = {l0}, L1 = {l1}  →  H0 = {h0:.4}, H1 = {h1:.4}");
    }
    Ok(())
}
