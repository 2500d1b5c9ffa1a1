//! Objective zoo: network losses with certified constants, the lower-bound
//! constructions, counterexamples and small convex/PL test functions.

mod counter;
mod least_squares;
mod nets;
mod onedim;
mod simple;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::rng::{normal_matrix, seeded};

pub use counter::{make_counterexample, Counterexample, CounterexampleKind, Witness};
pub use least_squares::{make_interpolating_least_squares, InterpolatingLeastSquares};
pub use nets::{
    balanced_from_profile, make_balanced_init, make_deep_leaky, make_deep_linear,
    make_semi_linear, make_two_layer_ce_l2, make_two_layer_mse_l2, Activation, Balance, Loss,
    NetDiagnostics, NetObjective,
};
pub use onedim::{
    make_exp_quadratic, make_pl_lower_bound, make_pl_sin_quadratic, make_runway, ExpQuadratic,
    PlLowerBound, PlSinQuadratic, Runway,
};
pub use simple::{AffineComposition, Quadratic, SumObjective};

/// Inputs X (d×m) and targets Y (c×m) with cached spectral quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPair {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    /// λ_min(XXᵀ)
    pub lambda_min: f64,
    /// ‖X‖₂
    pub x_norm: f64,
    /// ‖Y‖_F
    pub y_frob: f64,
}

impl DatasetPair {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.ncols() != y.ncols() {
            return Err(LabError::Construction(format!(
                "X has {} samples but Y has {}",
                x.ncols(),
                y.ncols()
            )));
        }
        let gram = &x * x.transpose();
        let eig = gram.symmetric_eigenvalues();
        let lambda_min = eig.min().max(0.0);
        let x_norm = eig.max().max(0.0).sqrt();
        let y_frob = y.norm();
        Ok(DatasetPair { x, y, lambda_min, x_norm, y_frob })
    }

    /// Gaussian X (d×m) and Y (c×m).
    pub fn random(d: usize, c: usize, m: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded(seed);
        let x = normal_matrix(d, m, &mut rng);
        let y = normal_matrix(c, m, &mut rng);
        DatasetPair::new(x, y)
    }

    pub fn d(&self) -> usize {
        self.x.nrows()
    }

    pub fn c(&self) -> usize {
        self.y.nrows()
    }

    pub fn m(&self) -> usize {
        self.x.ncols()
    }

    pub fn require_full_rank(&self) -> Result<()> {
        if self.lambda_min <= 1e-12 * (1.0 + self.x_norm * self.x_norm) {
            return Err(LabError::Precondition("λ_min(XXᵀ) must be positive (needs m ≥ d)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActivationKind {
    Identity,
    LeakyRelu { b: f64 },
    Tanh,
}

/// An activation with its bounds |φ(x)| ≤ C1|x|, |φ'| ≤ C2, |φ''| ≤ C3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    pub c1: f64,
    pub c2: f64,
    /// None when φ is not twice differentiable.
    pub c3: Option<f64>,
}

/// Safe upper bound on max|tanh''| = 4/(3√3) ≈ 0.76980.
pub const TANH_C3: f64 = 0.7699;

impl ActivationSpec {
    pub fn identity() -> Self {
        ActivationSpec { kind: ActivationKind::Identity, c1: 1.0, c2: 1.0, c3: Some(0.0) }
    }

    pub fn leaky_relu(b: f64) -> Result<Self> {
        if !(b > 0.0 && b <= 1.0) {
            return Err(LabError::Construction(format!("leaky-ReLU slope {b} outside (0,1]")));
        }
        Ok(ActivationSpec { kind: ActivationKind::LeakyRelu { b }, c1: 1.0, c2: 1.0, c3: None })
    }

    pub fn tanh() -> Self {
        let spec = ActivationSpec { kind: ActivationKind::Tanh, c1: 1.0, c2: 1.0, c3: Some(TANH_C3) };
        // grid check of the curvature bound
        let worst = (0..=20_000)
            .map(|i| -6.0 + 12.0 * i as f64 / 20_000.0)
            .map(|x| Activation::Tanh.d2(x).abs())
            .fold(0.0, f64::max);
        assert!(worst <= TANH_C3, "tanh curvature bound violated on grid: {worst}");
        spec
    }

    pub fn activation(&self) -> Activation {
        match self.kind {
            ActivationKind::Identity => Activation::Identity,
            ActivationKind::LeakyRelu { b } => Activation::Leaky(b),
            ActivationKind::Tanh => Activation::Tanh,
        }
    }
}

/// Claimed bound ‖∇²f(w)‖₂ ≤ H0 + H1·(f(w) − f_star)^ρ on `region`.
///
/// `f_star` is the baseline of the bound, which need not be the true
/// minimum: bounds written as H0 + H1·f use baseline 0 (`conservative`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessCertificate {
    pub h0: f64,
    pub h1: f64,
    pub f_star: f64,
    pub rho: f64,
    pub region: String,
    #[serde(default)]
    pub conservative: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

impl SmoothnessCertificate {
    pub fn new(h0: f64, h1: f64, f_star: f64, region: impl Into<String>) -> Self {
        SmoothnessCertificate {
            h0,
            h1,
            f_star,
            rho: 1.0,
            region: region.into(),
            conservative: false,
            mu: None,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn conservative(mut self) -> Self {
        self.conservative = true;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.h0.is_finite() && self.h1.is_finite() && self.h0 >= 0.0 && self.h1 >= 0.0;
        if !ok || !(self.rho >= 1.0) {
            return Err(LabError::Precondition(format!(
                "certificate needs finite H0,H1 ≥ 0 and ρ ≥ 1, got ({}, {}, ρ={})",
                self.h0, self.h1, self.rho
            )));
        }
        Ok(())
    }

    /// Right-hand side of the bound at loss value `f`.
    pub fn bound(&self, f: f64) -> f64 {
        let gap = (f - self.f_star).max(0.0);
        self.h0 + self.h1 * gap.powf(self.rho)
    }

    /// Re-expresses a ρ=1 bound relative to a higher baseline `f_star`
    /// (typically the true minimum): H0 + H1(f − b) = (H0 + H1(f* − b)) + H1(f − f*).
    pub fn rebased(&self, f_star: f64) -> Result<Self> {
        if self.rho != 1.0 {
            return Err(LabError::Precondition("rebasing needs ρ = 1".into()));
        }
        if f_star < self.f_star - 1e-12 * self.f_star.abs().max(1.0) {
            return Err(LabError::Inconsistent(format!(
                "new baseline {f_star} below certificate baseline {}",
                self.f_star
            )));
        }
        let mut out = self.clone();
        out.h0 = self.h0 + self.h1 * (f_star - self.f_star).max(0.0);
        out.f_star = f_star;
        out.conservative = false;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_spectral_cache() {
        let x = DMatrix::from_row_slice(2, 3, &[2.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let y = DMatrix::from_row_slice(1, 3, &[3.0, 4.0, 0.0]);
        let d = DatasetPair::new(x, y).unwrap();
        assert!((d.lambda_min - 1.0).abs() < 1e-12);
        assert!((d.x_norm - 2.0).abs() < 1e-12);
        assert!((d.y_frob - 5.0).abs() < 1e-12);
        assert!(DatasetPair::new(DMatrix::zeros(2, 3), DMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn activation_constants() {
        assert!(ActivationSpec::leaky_relu(0.0).is_err());
        assert!(ActivationSpec::leaky_relu(1.5).is_err());
        let l = ActivationSpec::leaky_relu(0.3).unwrap();
        assert_eq!((l.c1, l.c2, l.c3), (1.0, 1.0, None));
        let t = ActivationSpec::tanh();
        assert!(t.c3.unwrap() >= 4.0 / (3.0 * 3f64.sqrt()));
    }

    #[test]
    fn rebase_preserves_bound() {
        let c = SmoothnessCertificate::new(0.5, 1.0, 0.0, "all");
        let r = c.rebased(0.5).unwrap();
        assert_eq!((r.h0, r.h1), (1.0, 1.0));
        for f in [0.5, 1.0, 7.0] {
            assert!((c.bound(f) - r.bound(f)).abs() < 1e-12);
        }
        assert!(r.rebased(0.1).is_err());
    }
}
