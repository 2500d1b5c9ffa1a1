use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ActivationSpec, DatasetPair};
use crate::core::{Objective, ParamPoint, Shape};
use crate::error::{LabError, Result};
use crate::rng::{normal_matrix, seeded, LabRng};
use rand::Rng;

/// Probability clamp for the cross-entropy loss.
pub const CE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    /// max{x, bx}; the derivative at 0 is taken from the slope-b branch.
    Leaky(f64),
    Tanh,
}

impl Activation {
    pub fn f(&self, x: f64) -> f64 {
        match *self {
            Activation::Identity => x,
            Activation::Leaky(b) => {
                if x > 0.0 {
                    x
                } else {
                    b * x
                }
            }
            Activation::Tanh => x.tanh(),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match *self {
            Activation::Identity => 1.0,
            Activation::Leaky(b) => {
                if x > 0.0 {
                    1.0
                } else {
                    b
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match *self {
            Activation::Identity | Activation::Leaky(_) => 0.0,
            Activation::Tanh => {
                let t = x.tanh();
                -2.0 * t * (1.0 - t * t)
            }
        }
    }

    fn has_kink(&self) -> bool {
        matches!(self, Activation::Leaky(b) if *b != 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    /// ‖Y − F‖²_F
    Mse,
    /// Sigmoid cross-entropy summed over samples (c = 1).
    CrossEntropy,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Chain network F = φ₁(W₁ φ₂(W₂ ⋯ φ_ℓ(W_ℓ X))) with per-layer L2 terms.
///
/// `dims = [c, n₁, …, n_{ℓ−1}, d]`, so W_i is dims[i−1] × dims[i].
#[derive(Debug, Clone)]
pub struct NetObjective {
    name: String,
    data: DatasetPair,
    dims: Vec<usize>,
    acts: Vec<Activation>,
    loss: Loss,
    reg: Vec<f64>,
    f_star: Option<f64>,
}

/// Quantities needed to check the region assumptions of the certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetDiagnostics {
    /// λ_min(W_iᵀW_i) per layer.
    pub lambda_min_gram: Vec<f64>,
    /// ‖W_iᵀW_i − W_{i+1}W_{i+1}ᵀ‖_F for consecutive layers.
    pub strong_residuals: Vec<f64>,
    pub frob_norms: Vec<f64>,
    /// Smallest |pre-activation| feeding a kinked activation (∞ if none).
    pub min_abs_preactivation: f64,
}

struct Forward {
    zs: Vec<DMatrix<f64>>,
    acts: Vec<DMatrix<f64>>,
}

impl NetObjective {
    fn build(
        name: &str,
        data: DatasetPair,
        dims: &[usize],
        acts: Vec<Activation>,
        loss: Loss,
        reg: Vec<f64>,
    ) -> Result<Self> {
        if dims.len() < 2 {
            return Err(LabError::Construction("need at least one layer".into()));
        }
        if dims[0] != data.c() || dims[dims.len() - 1] != data.d() {
            return Err(LabError::Construction(format!(
                "layer dims {:?} must start at c={} and end at d={}",
                dims,
                data.c(),
                data.d()
            )));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(LabError::Construction("zero-width layer".into()));
        }
        Ok(NetObjective {
            name: name.to_string(),
            data,
            dims: dims.to_vec(),
            acts,
            loss,
            reg,
            f_star: None,
        })
    }

    /// Declares the known minimum (e.g. for a realizable target).
    pub fn with_f_star(mut self, f_star: Option<f64>) -> Self {
        self.f_star = f_star;
        self
    }

    pub fn data(&self) -> &DatasetPair {
        &self.data
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn depth(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn activations(&self) -> &[Activation] {
        &self.acts
    }

    fn layers(&self, w: &[f64]) -> Vec<DMatrix<f64>> {
        let mut out = Vec::with_capacity(self.depth());
        let mut off = 0;
        for i in 0..self.depth() {
            let (r, c) = (self.dims[i], self.dims[i + 1]);
            out.push(DMatrix::from_column_slice(r, c, &w[off..off + r * c]));
            off += r * c;
        }
        out
    }

    fn inputs(&self, cols: Option<&[usize]>) -> (DMatrix<f64>, DMatrix<f64>) {
        match cols {
            None => (self.data.x.clone(), self.data.y.clone()),
            Some(c) => (self.data.x.select_columns(c), self.data.y.select_columns(c)),
        }
    }

    fn forward(&self, ws: &[DMatrix<f64>], x: &DMatrix<f64>) -> Forward {
        let l = ws.len();
        let mut zs = vec![DMatrix::zeros(0, 0); l];
        let mut acts = vec![DMatrix::zeros(0, 0); l];
        for i in (0..l).rev() {
            let input = if i + 1 == l { x } else { &acts[i + 1] };
            let z = &ws[i] * input;
            let act = self.acts[i];
            acts[i] = z.map(|v| act.f(v));
            zs[i] = z;
        }
        Forward { zs, acts }
    }

    fn data_loss(&self, fw: &Forward, y: &DMatrix<f64>) -> f64 {
        match self.loss {
            Loss::Mse => (y - &fw.acts[0]).norm_squared(),
            Loss::CrossEntropy => fw.zs[0]
                .iter()
                .zip(y.iter())
                .map(|(&z, &t)| {
                    let p = sigmoid(z).clamp(CE_CLAMP, 1.0 - CE_CLAMP);
                    -t * p.ln() - (1.0 - t) * (1.0 - p).ln()
                })
                .sum(),
        }
    }

    fn reg_value(&self, ws: &[DMatrix<f64>]) -> f64 {
        ws.iter().zip(&self.reg).map(|(w, l)| 0.5 * l * w.norm_squared()).sum()
    }

    fn eval(&self, w: &[f64], cols: Option<&[usize]>, scale: f64, grad: bool) -> (f64, Vec<f64>) {
        let ws = self.layers(w);
        let (x, y) = self.inputs(cols);
        let fw = self.forward(&ws, &x);
        let f = scale * self.data_loss(&fw, &y) + self.reg_value(&ws);
        if !grad {
            return (f, Vec::new());
        }
        let l = ws.len();
        // G_0 = ∂L/∂Z_1
        let mut g = match self.loss {
            Loss::Mse => {
                let act = self.acts[0];
                let r = (&fw.acts[0] - &y) * (2.0 * scale);
                r.zip_map(&fw.zs[0], |a, z| a * act.d1(z))
            }
            Loss::CrossEntropy => fw.zs[0].zip_map(&y, |z, t| scale * (sigmoid(z) - t)),
        };
        let mut out = Vec::with_capacity(w.len());
        for i in 0..l {
            let input = if i + 1 == l { &x } else { &fw.acts[i + 1] };
            let dw = &g * input.transpose() + &ws[i] * self.reg[i];
            out.extend_from_slice(dw.as_slice());
            if i + 1 < l {
                let act = self.acts[i + 1];
                g = (ws[i].transpose() * &g).zip_map(&fw.zs[i + 1], |a, z| a * act.d1(z));
            }
        }
        (f, out)
    }

    pub fn diagnostics(&self, w: &[f64]) -> NetDiagnostics {
        let ws = self.layers(w);
        let grams: Vec<DMatrix<f64>> = ws.iter().map(|m| m.transpose() * m).collect();
        let lambda_min_gram = grams.iter().map(|g| g.symmetric_eigenvalues().min()).collect();
        let strong_residuals = ws
            .windows(2)
            .zip(&grams)
            .map(|(pair, gram)| (gram - &pair[1] * pair[1].transpose()).norm())
            .collect();
        let frob_norms = ws.iter().map(|m| m.norm()).collect();
        let fw = self.forward(&ws, &self.data.x);
        let mut min_pre = f64::INFINITY;
        for (z, act) in fw.zs.iter().zip(&self.acts) {
            if act.has_kink() {
                min_pre = z.iter().fold(min_pre, |m, v| m.min(v.abs()));
            }
        }
        NetDiagnostics { lambda_min_gram, strong_residuals, frob_norms, min_abs_preactivation: min_pre }
    }

    pub fn point(&self, w: Vec<f64>) -> Result<ParamPoint> {
        ParamPoint::new(w, self.shapes())
    }
}

impl Objective for NetObjective {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn dim(&self) -> usize {
        self.dims.windows(2).map(|p| p[0] * p[1]).sum()
    }

    fn value(&self, w: &[f64]) -> f64 {
        self.eval(w, None, 1.0, false).0
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        self.eval(w, None, 1.0, true).1
    }

    fn value_grad(&self, w: &[f64]) -> (f64, Vec<f64>) {
        self.eval(w, None, 1.0, true)
    }

    fn shapes(&self) -> Vec<Shape> {
        self.dims
            .windows(2)
            .enumerate()
            .map(|(i, p)| Shape::new(format!("W{}", i + 1), p[0], p[1]))
            .collect()
    }

    fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    fn n_components(&self) -> Option<usize> {
        Some(self.data.m())
    }

    fn component_value(&self, i: usize, w: &[f64]) -> f64 {
        self.eval(w, Some(&[i]), self.data.m() as f64, false).0
    }

    fn component_gradient(&self, i: usize, w: &[f64]) -> Vec<f64> {
        self.eval(w, Some(&[i]), self.data.m() as f64, true).1
    }

    fn component_f_star(&self, _i: usize) -> Option<f64> {
        // interpolation: each sample loss is minimised wherever f is
        self.f_star
    }

    fn batch_value_grad(&self, idx: &[usize], w: &[f64]) -> (f64, Vec<f64>) {
        let scale = self.data.m() as f64 / idx.len() as f64;
        self.eval(w, Some(idx), scale, true)
    }
}

pub fn make_deep_linear(data: DatasetPair, layer_dims: &[usize]) -> Result<NetObjective> {
    let l = layer_dims.len().saturating_sub(1);
    NetObjective::build("deep_linear", data, layer_dims, vec![Activation::Identity; l], Loss::Mse, vec![0.0; l])
}

/// ‖Y − W₁ φ(W₂⋯W_ℓ X)‖²_F with leaky-ReLU φ of slope b.
pub fn make_semi_linear(data: DatasetPair, layer_dims: &[usize], b: f64) -> Result<NetObjective> {
    ActivationSpec::leaky_relu(b)?;
    let l = layer_dims.len().saturating_sub(1);
    if l < 2 {
        return Err(LabError::Construction("semi-linear network needs ℓ ≥ 2".into()));
    }
    let mut acts = vec![Activation::Identity; l];
    acts[1] = Activation::Leaky(b);
    NetObjective::build("semi_linear", data, layer_dims, acts, Loss::Mse, vec![0.0; l])
}

/// Leaky-ReLU after every layer except the first; `slopes[j]` belongs to layer j+2.
pub fn make_deep_leaky(data: DatasetPair, layer_dims: &[usize], slopes: &[f64]) -> Result<NetObjective> {
    let l = layer_dims.len().saturating_sub(1);
    if l < 2 || slopes.len() != l - 1 {
        return Err(LabError::Construction(format!(
            "deep leaky network with ℓ={l} needs ℓ−1 slopes, got {}",
            slopes.len()
        )));
    }
    let mut acts = vec![Activation::Identity];
    for &b in slopes {
        ActivationSpec::leaky_relu(b)?;
        acts.push(Activation::Leaky(b));
    }
    NetObjective::build("deep_leaky", data, layer_dims, acts, Loss::Mse, vec![0.0; l])
}

pub fn make_two_layer_mse_l2(
    data: DatasetPair,
    hidden: usize,
    act: ActivationSpec,
    lambda1: f64,
    lambda2: f64,
) -> Result<NetObjective> {
    if act.c3.is_none() {
        return Err(LabError::Construction("activation must be twice differentiable (C3 undefined)".into()));
    }
    if !(lambda1 >= 0.0 && lambda2 >= 0.0) {
        return Err(LabError::Construction("regularization weights must be non-negative".into()));
    }
    let dims = [data.c(), hidden, data.d()];
    let acts = vec![Activation::Identity, act.activation()];
    NetObjective::build("two_layer_mse_l2", data, &dims, acts, Loss::Mse, vec![lambda1, lambda2])
}

pub fn make_two_layer_ce_l2(
    data: DatasetPair,
    hidden: usize,
    act: ActivationSpec,
    lambda1: f64,
    lambda2: f64,
) -> Result<NetObjective> {
    if data.c() != 1 {
        return Err(LabError::Construction("cross-entropy network needs a single output row".into()));
    }
    if data.y.iter().any(|&t| t != 0.0 && t != 1.0) {
        return Err(LabError::Construction("labels must lie in {0,1}".into()));
    }
    if !(lambda1 >= 0.0 && lambda2 >= 0.0) {
        return Err(LabError::Construction("regularization weights must be non-negative".into()));
    }
    let dims = [1, hidden, data.d()];
    let acts = vec![Activation::Identity, act.activation()];
    NetObjective::build("two_layer_ce_l2", data, &dims, acts, Loss::CrossEntropy, vec![lambda1, lambda2])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Balance {
    /// W_iᵀW_i = W_{i+1}W_{i+1}ᵀ
    Strong,
    /// equal Frobenius norms
    Weak,
}

fn frame(n: usize, r: usize, rng: &mut LabRng) -> DMatrix<f64> {
    normal_matrix(n, r, rng).qr().q()
}

/// Strongly balanced weights W_i = U_{i−1} diag(profile) U_iᵀ with random
/// orthonormal frames U_i ∈ R^{n_i×r}, r = profile length ≤ min dims.
pub fn balanced_from_profile(layer_dims: &[usize], profile: &[f64], rng: &mut LabRng) -> Result<ParamPoint> {
    let r = profile.len();
    let min_dim = layer_dims.iter().copied().min().unwrap_or(0);
    if layer_dims.len() < 2 || r == 0 || r > min_dim {
        return Err(LabError::Construction(format!(
            "strong balance shares one singular profile across all layers, so its rank r={r} \
             must satisfy 1 ≤ r ≤ min(layer dims) = {min_dim}"
        )));
    }
    let frames: Vec<DMatrix<f64>> = layer_dims.iter().map(|&n| frame(n, r, rng)).collect();
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(profile));
    let mats: Vec<DMatrix<f64>> =
        frames.windows(2).map(|u| &u[0] * &s * u[1].transpose()).collect();
    Ok(ParamPoint::from_matrices(&mats))
}

pub fn make_balanced_init(layer_dims: &[usize], scale: f64, mode: Balance, seed: u64) -> Result<ParamPoint> {
    if layer_dims.len() < 2 {
        return Err(LabError::Construction("need at least one layer".into()));
    }
    let mut rng = seeded(seed);
    match mode {
        Balance::Strong => {
            let r = layer_dims.iter().copied().min().unwrap_or(0);
            let mut profile: Vec<f64> = (0..r).map(|_| rng.random_range(0.5..1.5)).collect();
            let n = profile.iter().map(|x| x * x).sum::<f64>().sqrt();
            profile.iter_mut().for_each(|x| *x *= scale / n.max(f64::MIN_POSITIVE));
            balanced_from_profile(layer_dims, &profile, &mut rng)
        }
        Balance::Weak => {
            let mats: Vec<DMatrix<f64>> = layer_dims
                .windows(2)
                .map(|p| {
                    let m = normal_matrix(p[0], p[1], &mut rng);
                    let n = m.norm();
                    m * (scale / n)
                })
                .collect();
            Ok(ParamPoint::from_matrices(&mats))
        }
    }
}
