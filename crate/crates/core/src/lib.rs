//! A laboratory for (H0,H1)-smoothness: ‖∇²f(w)‖₂ ≤ H0 + H1·(f(w) − f*).
//!
//! The crate bundles an objective zoo with certified constants, gradient
//! descent drivers with warm-up step-size policies, empirical smoothness
//! estimators, closed-form bound predictors and lemma checkers, plus a
//! small run harness that writes CSV/JSON artifacts.
//!
//! Run the examples with `cargo run --example <name>`; the `warmup-lab`
//! binary exposes the same functionality on the command line.

pub mod core;
pub mod error;
pub mod harness;
pub mod problems;
pub mod optimize;
pub mod rng;
pub mod schedules;
pub mod smoothness;
pub mod theory;

pub use error::{LabError, Result};
