use nalgebra::DMatrix;

use super::objective::{norm, Objective};
use crate::error::{LabError, Result};

pub const DEFAULT_HESSIAN_CAP: usize = 200;

/// h = 1e-6·max(1, ‖w‖∞).
pub fn default_fd_step(w: &[f64]) -> f64 {
    1e-6 * w.iter().fold(1.0_f64, |m, x| m.max(x.abs()))
}

pub fn finite_diff_gradient(obj: &dyn Objective, w: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(LabError::Precondition("finite-difference step must be positive".into()));
    }
    let mut x = w.to_vec();
    let mut g = Vec::with_capacity(w.len());
    for i in 0..w.len() {
        let orig = x[i];
        x[i] = orig + h;
        let fp = obj.value(&x);
        x[i] = orig - h;
        let fm = obj.value(&x);
        x[i] = orig;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(LabError::Evaluation { coord: i });
        }
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

pub fn finite_diff_hvp(obj: &dyn Objective, w: &[f64], v: &[f64], h: f64) -> Result<Vec<f64>> {
    let nv = norm(v);
    if !(nv > 0.0) || !(h > 0.0) {
        return Err(LabError::Precondition("need ‖v‖ > 0 and h > 0".into()));
    }
    let s = h / nv;
    let wp: Vec<f64> = w.iter().zip(v).map(|(a, b)| a + s * b).collect();
    let wm: Vec<f64> = w.iter().zip(v).map(|(a, b)| a - s * b).collect();
    let gp = obj.gradient(&wp);
    let gm = obj.gradient(&wm);
    let out: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) * nv / (2.0 * h)).collect();
    if out.iter().any(|x| !x.is_finite()) {
        return Err(LabError::NonFiniteGradient("Hessian-vector product"));
    }
    Ok(out)
}

pub fn dense_hessian_fd(obj: &dyn Objective, w: &[f64], h: f64) -> Result<DMatrix<f64>> {
    dense_hessian_fd_capped(obj, w, h, DEFAULT_HESSIAN_CAP)
}

pub fn dense_hessian_fd_capped(
    obj: &dyn Objective,
    w: &[f64],
    h: f64,
    cap: usize,
) -> Result<DMatrix<f64>> {
    let n = obj.dim();
    if n > cap {
        return Err(LabError::Capacity { dim: n, cap });
    }
    let mut hess = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = finite_diff_hvp(obj, w, &e, h)?;
        e[j] = 0.0;
        for (i, c) in col.into_iter().enumerate() {
            hess[(i, j)] = c;
        }
    }
    Ok((&hess + hess.transpose()) * 0.5)
}
