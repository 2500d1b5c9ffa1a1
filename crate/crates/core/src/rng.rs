//! Project-wide PRNG. Every seeded stream in the lab comes from here so
//! runs reproduce across builds.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type LabRng = ChaCha8Rng;

/// Recorded in run metadata.
pub const PRNG_ID: &str = "ChaCha8Rng/rand_chacha-0.9";

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(n: usize, rng: &mut LabRng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn normal_matrix(rows: usize, cols: usize, rng: &mut LabRng) -> DMatrix<f64> {
    DMatrix::from_vec(rows, cols, normal_vec(rows * cols, rng))
}
