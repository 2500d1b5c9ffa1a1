use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::nets::{make_semi_linear, NetObjective};
use super::DatasetPair;
use crate::core::{default_fd_step, dense_hessian_fd, norm, Objective, Shape};
use crate::error::Result;

/// Objectives that are (H0,H1)-smooth but violate every (L0,L1) bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CounterexampleKind {
    /// f = f₁ + f₂ with f' = 2 sin(w²).
    SumSinSquare,
    /// f(w) = g(Aw) with g(y) = cos(y₁)e^{y₁}e^{y₂}, A = (1,0)ᵀ.
    AffineCosExp,
    /// ½(u·tanh v)² + λ₁u²/2 + λ₂v²/2.
    TwoLayerL2 { lambda1: f64, lambda2: f64 },
    /// ‖Y − W₁φ(W₂X)‖² on weakly balanced weights, leaky slope b.
    BalancedTwoLayer { b: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub m: usize,
    pub point: Vec<f64>,
    pub grad_norm: f64,
    pub hess_norm: f64,
}

impl Witness {
    /// ‖∇²f‖ / (1 + ‖∇f‖): unbounded growth rules out every (L0,L1) pair.
    pub fn ratio(&self) -> f64 {
        self.hess_norm / (1.0 + self.grad_norm)
    }
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub kind: CounterexampleKind,
    net: Option<NetObjective>,
}

pub fn make_counterexample(kind: CounterexampleKind) -> Result<Counterexample> {
    let net = match kind {
        CounterexampleKind::BalancedTwoLayer { b } => {
            let x = DMatrix::identity(3, 3);
            let y = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
            Some(make_semi_linear(DatasetPair::new(x, y)?, &[3, 2, 3], b)?)
        }
        _ => None,
    };
    Ok(Counterexample { kind, net })
}

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            left + right + diff / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

impl Counterexample {
    fn two_layer(&self, w: &[f64]) -> (f64, Vec<f64>, DMatrix<f64>) {
        let (l1, l2) = match self.kind {
            CounterexampleKind::TwoLayerL2 { lambda1, lambda2 } => (lambda1, lambda2),
            _ => unreachable!(),
        };
        let (u, v) = (w[0], w[1]);
        let s = v.tanh();
        let ds = 1.0 - s * s;
        let dds = -2.0 * s * ds;
        let f = 0.5 * (u * s).powi(2) + 0.5 * l1 * u * u + 0.5 * l2 * v * v;
        let g = vec![u * s * s + l1 * u, u * u * s * ds + l2 * v];
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[s * s + l1, 2.0 * u * s * ds, 2.0 * u * s * ds, u * u * (ds * ds + s * dds) + l2],
        );
        (f, g, h)
    }

    /// The m-th member of the witness family, evaluated so that the gradient
    /// vanishes exactly where the construction says it does.
    pub fn witness(&self, m: usize) -> Witness {
        let mf = m as f64;
        match self.kind {
            CounterexampleKind::SumSinSquare => {
                // w² = mπ + t with t = 0: sin(w²) = ±sin t, cos(w²) = ±cos t
                let w = (mf * PI).sqrt();
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let t = 0.0_f64;
                Witness {
                    m,
                    point: vec![w],
                    grad_norm: (2.0 * sign * t.sin()).abs(),
                    hess_norm: (4.0 * w * sign * t.cos()).abs(),
                }
            }
            CounterexampleKind::AffineCosExp => {
                // w = π/4 + 2πm + t: f' = −√2 e^w sin t, f'' = −2 sin(π/4 + t) e^w
                let w = FRAC_PI_4 + 2.0 * PI * mf;
                let t = 0.0_f64;
                let e = w.exp();
                Witness {
                    m,
                    point: vec![w],
                    grad_norm: (SQRT_2 * e * t.sin()).abs(),
                    hess_norm: (2.0 * (FRAC_PI_4 + t).sin() * e).abs(),
                }
            }
            CounterexampleKind::TwoLayerL2 { .. } => {
                let point = vec![mf, 0.0];
                let (_, g, h) = self.two_layer(&point);
                Witness { m, grad_norm: norm(&g), hess_norm: spectral(&h), point }
            }
            CounterexampleKind::BalancedTwoLayer { .. } => {
                let t = 1.0 + mf;
                let point = balanced_witness_point(t);
                let net = self.net.as_ref().expect("net");
                let h = dense_hessian_fd(net, &point, default_fd_step(&point)).expect("small dim");
                Witness { m, grad_norm: norm(&net.gradient(&point)), hess_norm: spectral(&h), point }
            }
        }
    }

    /// Checks ‖∇²f(w)‖ ≤ L0 + L1‖∇f(w)‖ along the witness family; returns the
    /// indices m where it fails.
    pub fn l0l1_violations(&self, l0: f64, l1: f64, ms: impl IntoIterator<Item = usize>) -> Vec<usize> {
        ms.into_iter()
            .filter(|&m| {
                let w = self.witness(m);
                w.hess_norm > l0 + l1 * w.grad_norm
            })
            .collect()
    }
}

/// W₁ = [[t,0],[0,0],[0,0]], W₂ = [[1/t,0,0],[√(t²−1/t²),0,0]], flattened column-major.
pub fn balanced_witness_point(t: f64) -> Vec<f64> {
    let w1 = DMatrix::from_row_slice(3, 2, &[t, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let w2 = DMatrix::from_row_slice(2, 3, &[1.0 / t, 0.0, 0.0, (t * t - 1.0 / (t * t)).sqrt(), 0.0, 0.0]);
    let mut out = w1.as_slice().to_vec();
    out.extend_from_slice(w2.as_slice());
    out
}

fn spectral(h: &DMatrix<f64>) -> f64 {
    h.symmetric_eigenvalues().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

impl Objective for Counterexample {
    fn name(&self) -> String {
        match self.kind {
            CounterexampleKind::SumSinSquare => "sum_sin_square",
            CounterexampleKind::AffineCosExp => "affine_cos_exp",
            CounterexampleKind::TwoLayerL2 { .. } => "two_layer_l2",
            CounterexampleKind::BalancedTwoLayer { .. } => "balanced_two_layer",
        }
        .into()
    }

    fn dim(&self) -> usize {
        match self.kind {
            CounterexampleKind::SumSinSquare | CounterexampleKind::AffineCosExp => 1,
            CounterexampleKind::TwoLayerL2 { .. } => 2,
            CounterexampleKind::BalancedTwoLayer { .. } => 12,
        }
    }

    fn value(&self, w: &[f64]) -> f64 {
        match self.kind {
            CounterexampleKind::SumSinSquare => {
                simpson(&|u: f64| 2.0 * (u * u).sin(), 0.0, w[0], 1e-10)
            }
            CounterexampleKind::AffineCosExp => w[0].cos() * w[0].exp(),
            CounterexampleKind::TwoLayerL2 { .. } => self.two_layer(w).0,
            CounterexampleKind::BalancedTwoLayer { .. } => self.net.as_ref().unwrap().value(w),
        }
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        match self.kind {
            CounterexampleKind::SumSinSquare => vec![2.0 * (w[0] * w[0]).sin()],
            CounterexampleKind::AffineCosExp => vec![w[0].exp() * (w[0].cos() - w[0].sin())],
            CounterexampleKind::TwoLayerL2 { .. } => self.two_layer(w).1,
            CounterexampleKind::BalancedTwoLayer { .. } => self.net.as_ref().unwrap().gradient(w),
        }
    }

    fn hessian(&self, w: &[f64]) -> Option<DMatrix<f64>> {
        match self.kind {
            CounterexampleKind::SumSinSquare => {
                Some(DMatrix::from_element(1, 1, 4.0 * w[0] * (w[0] * w[0]).cos()))
            }
            CounterexampleKind::AffineCosExp => {
                Some(DMatrix::from_element(1, 1, -2.0 * w[0].sin() * w[0].exp()))
            }
            CounterexampleKind::TwoLayerL2 { .. } => Some(self.two_layer(w).2),
            CounterexampleKind::BalancedTwoLayer { .. } => None,
        }
    }

    fn shapes(&self) -> Vec<Shape> {
        match &self.net {
            Some(n) => n.shapes(),
            None => vec![Shape::new("w", self.dim(), 1)],
        }
    }
}
