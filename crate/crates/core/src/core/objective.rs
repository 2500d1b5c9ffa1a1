use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::param::Shape;

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Evaluation contract shared by every problem in the zoo.
///
/// Implementations must be pure: the same input yields bit-identical output.
pub trait Objective: Send + Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    fn value(&self, w: &[f64]) -> f64;

    fn gradient(&self, w: &[f64]) -> Vec<f64>;

    fn value_grad(&self, w: &[f64]) -> (f64, Vec<f64>) {
        (self.value(w), self.gradient(w))
    }

    /// Block layout of the parameters; a single column by default.
    fn shapes(&self) -> Vec<Shape> {
        vec![Shape::new("w", self.dim(), 1)]
    }

    fn f_star(&self) -> Option<f64> {
        None
    }

    /// Closed-form Hessian where one is cheap; spectral checks prefer it
    /// over finite differences (e.g. across piecewise branches).
    fn hessian(&self, _w: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    fn n_components(&self) -> Option<usize> {
        None
    }

    fn component_value(&self, _i: usize, _w: &[f64]) -> f64 {
        panic!("{} has no finite-sum structure", self.name())
    }

    fn component_gradient(&self, _i: usize, _w: &[f64]) -> Vec<f64> {
        panic!("{} has no finite-sum structure", self.name())
    }

    fn component_f_star(&self, _i: usize) -> Option<f64> {
        None
    }

    /// Mean of the listed components and its gradient.
    fn batch_value_grad(&self, idx: &[usize], w: &[f64]) -> (f64, Vec<f64>) {
        let mut g = vec![0.0; self.dim()];
        let mut f = 0.0;
        for &i in idx {
            f += self.component_value(i, w);
            for (a, b) in g.iter_mut().zip(self.component_gradient(i, w)) {
                *a += b;
            }
        }
        let k = idx.len() as f64;
        g.iter_mut().for_each(|x| *x /= k);
        (f / k, g)
    }

    fn project_solution(&self, _w: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// One row of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub iter: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub step_size: f64,
    pub dist_to_solution: Option<f64>,
}
