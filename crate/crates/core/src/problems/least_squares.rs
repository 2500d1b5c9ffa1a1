use nalgebra::{DMatrix, DVector};

use super::SmoothnessCertificate;
use crate::core::Objective;
use crate::error::{LabError, Result};
use crate::rng::{normal_matrix, normal_vec, seeded};

/// f(w) = (1/n) Σ ½(x_iᵀw − y_i)² with y = X w† for a hidden w†, d > n.
#[derive(Debug, Clone)]
pub struct InterpolatingLeastSquares {
    /// n×d, rows are x_iᵀ.
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
    pub w_dagger: DVector<f64>,
    gram_inv: DMatrix<f64>,
}

pub fn make_interpolating_least_squares(n: usize, d: usize, seed: u64) -> Result<InterpolatingLeastSquares> {
    if !(d > n && n >= 1) {
        return Err(LabError::Precondition(format!("need d > n ≥ 1, got n={n}, d={d}")));
    }
    let mut rng = seeded(seed);
    let a = normal_matrix(n, d, &mut rng);
    let w_dagger = DVector::from_vec(normal_vec(d, &mut rng));
    let y = &a * &w_dagger;
    let gram_inv = (&a * a.transpose())
        .try_inverse()
        .ok_or_else(|| LabError::Construction("rank-deficient design".into()))?;
    Ok(InterpolatingLeastSquares { a, y, w_dagger, gram_inv })
}

impl InterpolatingLeastSquares {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    fn residual(&self, w: &[f64]) -> DVector<f64> {
        &self.a * DVector::from_column_slice(w) - &self.y
    }

    /// Constant Hessian (1/n)XᵀX, so H1 = 0.
    pub fn certificate(&self) -> SmoothnessCertificate {
        let h = self.a.transpose() * &self.a / self.n() as f64;
        let h0 = h.symmetric_eigenvalues().max();
        SmoothnessCertificate::new(h0, 0.0, 0.0, "all of R^d")
    }

    /// Rank-one Hessian x_i x_iᵀ: H0 = ‖x_i‖².
    pub fn component_certificate(&self, i: usize) -> SmoothnessCertificate {
        SmoothnessCertificate::new(self.a.row(i).norm_squared(), 0.0, 0.0, "all of R^d")
    }

    /// A single certificate valid for every component (and hence every mini-batch mean).
    pub fn uniform_component_certificate(&self) -> SmoothnessCertificate {
        let h0 = (0..self.n()).map(|i| self.a.row(i).norm_squared()).fold(0.0, f64::max);
        SmoothnessCertificate::new(h0, 0.0, 0.0, "all of R^d")
    }
}

impl Objective for InterpolatingLeastSquares {
    fn name(&self) -> String {
        "interpolating_least_squares".into()
    }
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, w: &[f64]) -> f64 {
        0.5 * self.residual(w).norm_squared() / self.n() as f64
    }
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let g = self.a.transpose() * self.residual(w) / self.n() as f64;
        g.as_slice().to_vec()
    }
    fn f_star(&self) -> Option<f64> {
        Some(0.0)
    }
    fn hessian(&self, _w: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.a.transpose() * &self.a / self.n() as f64)
    }
    fn n_components(&self) -> Option<usize> {
        Some(self.n())
    }
    fn component_value(&self, i: usize, w: &[f64]) -> f64 {
        let r = self.a.row(i).dot(&DVector::from_column_slice(w).transpose()) - self.y[i];
        0.5 * r * r
    }
    fn component_gradient(&self, i: usize, w: &[f64]) -> Vec<f64> {
        let r = self.a.row(i).dot(&DVector::from_column_slice(w).transpose()) - self.y[i];
        self.a.row(i).iter().map(|x| r * x).collect()
    }
    fn component_f_star(&self, _i: usize) -> Option<f64> {
        Some(0.0)
    }
    fn project_solution(&self, w: &[f64]) -> Option<Vec<f64>> {
        let v = DVector::from_column_slice(w);
        let p = &v - self.a.transpose() * (&self.gram_inv * self.residual(w));
        Some(p.as_slice().to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::dense_hessian_fd;

    #[test]
    fn interpolation_at_hidden_solution() {
        let p = make_interpolating_least_squares(4, 9, 3).unwrap();
        let w = p.w_dagger.as_slice();
        assert!(p.value(w) < 1e-24);
        for i in 0..4 {
            assert!(p.component_value(i, w) < 1e-24);
        }
        assert!(make_interpolating_least_squares(5, 5, 0).is_err());
    }

    #[test]
    fn projection_is_idempotent_and_feasible() {
        let p = make_interpolating_least_squares(5, 12, 8).unwrap();
        let w: Vec<f64> = (0..12).map(|i| (i as f64).sin() * 3.0).collect();
        let q = p.project_solution(&w).unwrap();
        let qq = p.project_solution(&q).unwrap();
        assert!(q.iter().zip(&qq).all(|(a, b)| (a - b).abs() < 1e-10));
        assert!(p.value(&q) < 1e-20);
    }

    #[test]
    fn component_certificate_matches_hessian() {
        let p = make_interpolating_least_squares(3, 6, 1).unwrap();
        struct Comp<'a>(&'a InterpolatingLeastSquares, usize);
        impl Objective for Comp<'_> {
            fn name(&self) -> String {
                "component".into()
            }
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn value(&self, w: &[f64]) -> f64 {
                self.0.component_value(self.1, w)
            }
            fn gradient(&self, w: &[f64]) -> Vec<f64> {
                self.0.component_gradient(self.1, w)
            }
        }
        for i in 0..3 {
            let h = dense_hessian_fd(&Comp(&p, i), &[0.3; 6], 1e-5).unwrap();
            let top = h.symmetric_eigenvalues().max();
            assert!((top - p.component_certificate(i).h0).abs() < 1e-6 * top);
        }
    }
}
