use nalgebra::DMatrix;

use super::SmoothnessCertificate;
use crate::core::Objective;
use crate::error::{LabError, Result};

fn scalar_hessian(v: f64) -> Option<DMatrix<f64>> {
    Some(DMatrix::from_element(1, 1, v))
}

/// Symmetric exponential tails glued to the bowl H1·w²/2 + 1/2 at |w| = 1/√H1.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpQuadratic {
    pub h1: f64,
    pub m: f64,
    a: f64,
}

pub fn make_exp_quadratic(h1: f64, m: f64) -> Result<ExpQuadratic> {
    if !(h1 > 0.0) || !(m > 1.0) {
        return Err(LabError::Precondition(format!("need H1 > 0 and M > 1, got H1={h1}, M={m}")));
    }
    Ok(ExpQuadratic { h1, m, a: h1.sqrt() })
}

impl ExpQuadratic {
    pub fn branch_point(&self) -> f64 {
        1.0 / self.a
    }

    /// w0 = (log M + 1)/√H1, where f(w0) = M.
    pub fn w0(&self) -> f64 {
        (self.m.ln() + 1.0) / self.a
    }

    fn derivs(&self, w: f64) -> (f64, f64, f64) {
        let x = w.abs();
        let s = w.signum();
        if x <= self.branch_point() {
            (0.5 * self.h1 * w * w + 0.5, self.h1 * w, self.h1)
        } else {
            let e = (self.a * x - 1.0).exp();
            (e, s * self.a * e, self.h1 * e)
        }
    }

    /// The stated constants (H0 = H1/2) hold for the bound H0 + H1·f, i.e.
    /// relative to baseline 0; see [`SmoothnessCertificate::rebased`] for
    /// the gap form at f* = 1/2.
    pub fn certificate(&self) -> SmoothnessCertificate {
        SmoothnessCertificate::new(self.h1 / 2.0, self.h1, 0.0, "all of R").conservative()
    }
}

impl Objective for ExpQuadratic {
    fn name(&self) -> String {
        "exp_quadratic".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, w: &[f64]) -> f64 {
        self.derivs(w[0]).0
    }
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        vec![self.derivs(w[0]).1]
    }
    fn f_star(&self) -> Option<f64> {
        Some(0.5)
    }
    fn hessian(&self, w: &[f64]) -> Option<DMatrix<f64>> {
        scalar_hessian(self.derivs(w[0]).2)
    }
    fn project_solution(&self, w: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; w.len()])
    }
}

/// Quadratic bowl, a long linear runway of slope m, then an exponential wall.
#[derive(Debug, Clone, PartialEq)]
pub struct Runway {
    pub h0: f64,
    pub h1: f64,
    pub delta: f64,
    pub m: f64,
    pub x1: f64,
    pub x2: f64,
    pub a: f64,
    pub b: f64,
}

pub fn make_runway(h0: f64, h1: f64, delta: f64) -> Result<Runway> {
    if !(h0 > 0.0 && h1 > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(LabError::Precondition(format!(
            "need H0, H1 > 0 and 0 < δ < 1, got ({h0}, {h1}, {delta})"
        )));
    }
    let m = (2.0 * h0 * delta).sqrt();
    let x1 = (2.0 * delta / h0).sqrt();
    let x2 = x1 + (1.0 - delta) / m;
    let a = m / h1.sqrt();
    Ok(Runway { h0, h1, delta, m, x1, x2, a, b: 1.0 - a })
}

impl Runway {
    fn derivs(&self, w: f64) -> (f64, f64, f64) {
        let x = w.abs();
        let s = w.signum();
        if x <= self.x1 {
            (0.5 * self.h0 * w * w, self.h0 * w, self.h0)
        } else if x <= self.x2 {
            (self.m * (x - self.x1) + self.delta, s * self.m, 0.0)
        } else {
            let e = self.a * (self.h1.sqrt() * (x - self.x2)).exp();
            (e + self.b, s * self.h1.sqrt() * e, self.h1 * e)
        }
    }

    /// On the wall f'' = H1(f − B), so the pair needs H0 ≥ −H1·B; H0 is
    /// raised to that level when δ is large relative to H1.
    pub fn certificate(&self) -> SmoothnessCertificate {
        let h0 = self.h0.max(-self.h1 * self.b);
        SmoothnessCertificate::new(h0, self.h1, 0.0, "all of R (piecewise C², per-branch Hessian)")
    }
}

impl Objective for Runway {
    fn name(&self) -> String {
        "runway".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, w: &[f64]) -> f64 {
        self.derivs(w[0]).0
    }
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        vec![self.derivs(w[0]).1]
    }
    fn f_star(&self) -> Option<f64> {
        Some(0.0)
    }
    fn hessian(&self, w: &[f64]) -> Option<DMatrix<f64>> {
        scalar_hessian(self.derivs(w[0]).2)
    }
    fn project_solution(&self, w: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; w.len()])
    }
}

/// μ-quadratic core with exponential tails from w_c = √(2C0/μ).
#[derive(Debug, Clone, PartialEq)]
pub struct PlLowerBound {
    pub c0: f64,
    pub mu: f64,
    pub h1: f64,
    pub wc: f64,
    pub a: f64,
    pub b: f64,
}

pub fn make_pl_lower_bound(c0: f64, mu: f64, h1: f64) -> Result<PlLowerBound> {
    if !(c0 > 0.0) || !(mu > 0.0 && mu <= 1.0) || !(h1 > 0.0) {
        return Err(LabError::Precondition(format!(
            "need C0 > 0, 0 < μ ≤ 1, H1 > 0, got ({c0}, {mu}, {h1})"
        )));
    }
    let wc = (2.0 * c0 / mu).sqrt();
    let a = (2.0 * c0 * mu / h1).sqrt();
    Ok(PlLowerBound { c0, mu, h1, wc, a, b: c0 - a })
}

impl PlLowerBound {
    fn derivs(&self, w: f64) -> (f64, f64, f64) {
        let x = w.abs();
        let s = w.signum();
        if x <= self.wc {
            (0.5 * self.mu * w * w, self.mu * w, self.mu)
        } else {
            let e = self.a * (self.h1.sqrt() * (x - self.wc)).exp();
            (e + self.b, s * self.h1.sqrt() * e, self.h1 * e)
        }
    }

    /// H0 = max{μ, H1(A − C0)}: the core needs μ, the tails need H0 ≥ −H1·B.
    pub fn certificate(&self) -> SmoothnessCertificate {
        let h0 = self.mu.max(self.h1 * (self.a - self.c0));
        SmoothnessCertificate::new(h0, self.h1, 0.0, "all of R").with_mu(self.mu)
    }

    pub fn w0(&self) -> f64 {
        self.wc
    }
}

impl Objective for PlLowerBound {
    fn name(&self) -> String {
        "pl_lower_bound".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, w: &[f64]) -> f64 {
        self.derivs(w[0]).0
    }
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        vec![self.derivs(w[0]).1]
    }
    fn f_star(&self) -> Option<f64> {
        Some(0.0)
    }
    fn hessian(&self, w: &[f64]) -> Option<DMatrix<f64>> {
        scalar_hessian(self.derivs(w[0]).2)
    }
    fn project_solution(&self, w: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; w.len()])
    }
}

/// w² + 3 sin²(w): non-convex but PL.
#[derive(Debug, Clone, PartialEq)]
pub struct PlSinQuadratic {
    pub mu: f64,
}

/// Grid used to estimate the PL constant.
pub const PL_GRID: (f64, f64, usize) = (-10.0, 10.0, 200_001);

pub fn make_pl_sin_quadratic() -> PlSinQuadratic {
    let (lo, hi, n) = PL_GRID;
    let mu = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .filter(|w| w.abs() > 1e-6)
        .map(|w| {
            let (f, g, _) = PlSinQuadratic::derivs(w);
            g * g / (2.0 * f)
        })
        .fold(f64::INFINITY, f64::min);
    PlSinQuadratic { mu }
}

impl PlSinQuadratic {
    fn derivs(w: f64) -> (f64, f64, f64) {
        let s = w.sin();
        (w * w + 3.0 * s * s, 2.0 * w + 3.0 * (2.0 * w).sin(), 2.0 + 6.0 * (2.0 * w).cos())
    }

    pub fn certificate(&self) -> SmoothnessCertificate {
        SmoothnessCertificate::new(8.0, 0.0, 0.0, "all of R").with_mu(self.mu)
    }
}

impl Objective for PlSinQuadratic {
    fn name(&self) -> String {
        "pl_sin_quadratic".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, w: &[f64]) -> f64 {
        Self::derivs(w[0]).0
    }
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        vec![Self::derivs(w[0]).1]
    }
    fn f_star(&self) -> Option<f64> {
        Some(0.0)
    }
    fn hessian(&self, w: &[f64]) -> Option<DMatrix<f64>> {
        scalar_hessian(Self::derivs(w[0]).2)
    }
    fn project_solution(&self, w: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; w.len()])
    }
}
