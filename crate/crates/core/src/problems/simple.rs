use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::SmoothnessCertificate;
use crate::core::Objective;
use crate::error::{LabError, Result};

/// f(w) = ½(w − c)ᵀA(w − c) + offset.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub a: DMatrix<f64>,
    pub center: DVector<f64>,
    pub offset: f64,
}

impl Quadratic {
    pub fn new(a: DMatrix<f64>, center: DVector<f64>, offset: f64) -> Result<Self> {
        if !a.is_square() || a.nrows() != center.len() {
            return Err(LabError::Construction("A must be square and match the center".into()));
        }
        let a = (&a + a.transpose()) * 0.5;
        Ok(Quadratic { a, center, offset })
    }

    pub fn isotropic(dim: usize, lambda: f64) -> Self {
        Quadratic {
            a: DMatrix::identity(dim, dim) * lambda,
            center: DVector::zeros(dim),
            offset: 0.0,
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Quadratic {
            a: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
            center: DVector::zeros(diag.len()),
            offset: 0.0,
        }
    }

    fn eigen_range(&self) -> (f64, f64) {
        let e = self.a.symmetric_eigenvalues();
        (e.min(), e.max())
    }

    pub fn certificate(&self) -> SmoothnessCertificate {
        let (lo, hi) = self.eigen_range();
        SmoothnessCertificate::new(lo.abs().max(hi.abs()), 0.0, self.offset, "all of R^d")
    }
}

impl Objective for Quadratic {
    fn name(&self) -> String {
        "quadratic".into()
    }
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, w: &[f64]) -> f64 {
        let d = DVector::from_column_slice(w) - &self.center;
        0.5 * d.dot(&(&self.a * &d)) + self.offset
    }
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let d = DVector::from_column_slice(w) - &self.center;
        (&self.a * d).as_slice().to_vec()
    }
    fn f_star(&self) -> Option<f64> {
        (self.eigen_range().0 >= 0.0).then_some(self.offset)
    }
    fn hessian(&self, _w: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.a.clone())
    }
    fn project_solution(&self, _w: &[f64]) -> Option<Vec<f64>> {
        (self.eigen_range().0 > 0.0).then(|| self.center.as_slice().to_vec())
    }
}

/// h = f + g on a shared parameter space.
#[derive(Clone)]
pub struct SumObjective {
    pub f: Arc<dyn Objective>,
    pub g: Arc<dyn Objective>,
}

impl SumObjective {
    pub fn new(f: Arc<dyn Objective>, g: Arc<dyn Objective>) -> Result<Self> {
        if f.dim() != g.dim() {
            return Err(LabError::Construction("summands must share a dimension".into()));
        }
        Ok(SumObjective { f, g })
    }
}

impl Objective for SumObjective {
    fn name(&self) -> String {
        format!("{}+{}", self.f.name(), self.g.name())
    }
    fn dim(&self) -> usize {
        self.f.dim()
    }
    fn value(&self, w: &[f64]) -> f64 {
        self.f.value(w) + self.g.value(w)
    }
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        self.f.gradient(w).iter().zip(self.g.gradient(w)).map(|(a, b)| a + b).collect()
    }
    fn hessian(&self, w: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.f.hessian(w)? + self.g.hessian(w)?)
    }
}

/// f(w) = g(Aw + b).
#[derive(Clone)]
pub struct AffineComposition {
    pub g: Arc<dyn Objective>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl AffineComposition {
    pub fn new(g: Arc<dyn Objective>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != g.dim() || b.len() != g.dim() {
            return Err(LabError::Construction("A must map into the domain of g".into()));
        }
        Ok(AffineComposition { g, a, b })
    }

    fn inner(&self, w: &[f64]) -> Vec<f64> {
        (&self.a * DVector::from_column_slice(w) + &self.b).as_slice().to_vec()
    }
}

impl Objective for AffineComposition {
    fn name(&self) -> String {
        format!("{}∘affine", self.g.name())
    }
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, w: &[f64]) -> f64 {
        self.g.value(&self.inner(w))
    }
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let gy = DVector::from_vec(self.g.gradient(&self.inner(w)));
        (self.a.transpose() * gy).as_slice().to_vec()
    }
    fn hessian(&self, w: &[f64]) -> Option<DMatrix<f64>> {
        let h = self.g.hessian(&self.inner(w))?;
        Some(self.a.transpose() * h * &self.a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_basics() {
        let q = Quadratic::diagonal(&[1.0, 4.0]);
        assert_eq!(q.value(&[1.0, 1.0]), 2.5);
        assert_eq!(q.gradient(&[1.0, 1.0]), vec![1.0, 4.0]);
        assert_eq!(q.certificate().h0, 4.0);
        assert_eq!(q.f_star(), Some(0.0));
        let indefinite = Quadratic::diagonal(&[1.0, -2.0]);
        assert_eq!(indefinite.f_star(), None);
        assert_eq!(indefinite.certificate().h0, 2.0);
    }

    #[test]
    fn sum_and_affine() {
        let f: Arc<dyn Objective> = Arc::new(Quadratic::isotropic(2, 1.0));
        let g: Arc<dyn Objective> = Arc::new(Quadratic::diagonal(&[2.0, 3.0]));
        let s = SumObjective::new(f.clone(), g).unwrap();
        assert_eq!(s.gradient(&[1.0, 1.0]), vec![3.0, 4.0]);
        let a = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let c = AffineComposition::new(f, a, DVector::from_vec(vec![0.0, 1.0])).unwrap();
        // g(y) = ½‖y‖², y = (w, 2w + 1)
        assert_eq!(c.value(&[1.0]), 0.5 * (1.0 + 9.0));
        assert_eq!(c.gradient(&[1.0]), vec![1.0 + 6.0]);
        assert_eq!(c.hessian(&[0.0]).unwrap()[(0, 0)], 5.0);
    }
}
