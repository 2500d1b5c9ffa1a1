//! Closed-form (H0,H1) constants for network losses.

use crate::error::{LabError, Result};
use crate::problems::{ActivationSpec, DatasetPair, SmoothnessCertificate};

fn depth_checked(data: &DatasetPair, layer_dims: &[usize]) -> Result<usize> {
    let l = layer_dims.len().saturating_sub(1);
    if l < 2 {
        return Err(LabError::Precondition(format!("need depth ℓ ≥ 2, got {l}")));
    }
    if layer_dims[0] != data.c() || layer_dims[l] != data.d() {
        return Err(LabError::Precondition(format!(
            "layer dims {layer_dims:?} do not match data (c={}, d={})",
            data.c(),
            data.d()
        )));
    }
    data.require_full_rank()?;
    Ok(l)
}

/// Strongly balanced deep linear network. The bound holds in the gap form
/// with H0 = 2·H̄0 + H1(1 + f*).
pub fn deep_linear_constants(data: &DatasetPair, layer_dims: &[usize], f_star: f64) -> Result<SmoothnessCertificate> {
    let l = depth_checked(data, layer_dims)? as f64;
    if !(f_star >= 0.0) {
        return Err(LabError::Precondition(format!("f* must be ≥ 0, got {f_star}")));
    }
    let (x, y, lam) = (data.x_norm, data.y_frob, data.lambda_min);
    let p = 2.0 * (data.d() as f64).powf((l - 1.0) / 2.0);
    let a = (2.0 * l - 2.0) / l;
    let b = (l - 2.0) / l;
    let inv = 1.0 / lam;
    let big = p.powf(a) * inv.powf(a / 2.0) * x * x;
    let small = p.powf(b) * inv.powf(b / 2.0) * x;
    let h0_bar = 4.0 * l * l * (big * y.powf(a) + small * y.powf(b));
    let h1 = 4.0 * l * l * (big + small + small * y.powf(b));
    let h0 = 2.0 * h0_bar + h1 * (1.0 + f_star);
    Ok(SmoothnessCertificate::new(h0, h1, f_star, "strongly balanced"))
}

/// One leaky-ReLU after the first layer. Bound of the form H0 + H1·f,
/// emitted with baseline 0.
pub fn semi_linear_constants(data: &DatasetPair, layer_dims: &[usize], b: f64, h: f64) -> Result<SmoothnessCertificate> {
    let l = depth_checked(data, layer_dims)? as f64;
    if !(b > 0.0 && b <= 1.0) || !(h > 0.0) {
        return Err(LabError::Precondition(format!("need b ∈ (0,1] and h > 0, got b={b}, h={h}")));
    }
    let (x, y, lam) = (data.x_norm, data.y_frob, data.lambda_min);
    let q = h * b * b * lam;
    let dl = (data.d() as f64).powf(l - 2.0);
    let e = (l - 2.0) / (2.0 * l - 2.0);
    let mid = 2.0 * (4.0 * dl * y * y / q).powf(e) * x;
    let last = 2.0 * (4.0 * dl / q).powf(e) * x;
    let h0 = l * l * (16.0 * dl * y * y / q * x * x + mid + last);
    let h1 = l * l * (16.0 * dl / q * x * x + mid + last);
    let region = format!(
        "λ_min(W1ᵀW1) ≥ {h}; weakly balanced; layers 2..{l} strongly balanced"
    );
    Ok(SmoothnessCertificate::new(h0, h1, 0.0, region).conservative())
}

/// ℓ−1 leaky-ReLUs. Bound H0 + H1·f^{ℓ−1} with baseline 0, ρ = ℓ−1.
pub fn deep_leaky_constants(
    data: &DatasetPair,
    layer_dims: &[usize],
    slopes: &[f64],
    h_list: &[f64],
) -> Result<SmoothnessCertificate> {
    let depth = depth_checked(data, layer_dims)?;
    if slopes.len() != depth - 1 || h_list.len() != depth - 1 {
        return Err(LabError::Precondition(format!(
            "need {} slopes and floors, got {} and {}",
            depth - 1,
            slopes.len(),
            h_list.len()
        )));
    }
    if slopes.iter().any(|b| !(*b > 0.0 && *b <= 1.0)) || h_list.iter().any(|h| !(*h > 0.0)) {
        return Err(LabError::Precondition("slopes must lie in (0,1] and floors be positive".into()));
    }
    let l = depth as f64;
    let (x, y, lam) = (data.x_norm, data.y_frob, data.lambda_min);
    let root: f64 = slopes.iter().zip(h_list).map(|(b, h)| h.sqrt() * b).product();
    let g = 2.0 * y / (lam.sqrt() * root);
    let big_l = lam * root * root;
    let t1 = 2.0 * l * (l - 1.0) * g.powf(l - 2.0) * x;
    let t2 = 4.0 * l * l * g.powf(2.0 * l - 2.0) * x * x;
    let t3 = 2.0 * l * (l - 1.0) * 4f64.powf((l - 2.0) / 2.0) * x / big_l.powf((l - 2.0) / 2.0);
    let t4 = 2.0 * l * l * 4f64.powf((2.0 * l - 2.0) / 2.0) * x * x / big_l.powf((2.0 * l - 2.0) / 2.0);
    let floors: Vec<String> =
        h_list.iter().enumerate().map(|(i, h)| format!("λ_min(W{0}ᵀW{0}) ≥ {h}", i + 1)).collect();
    let region = format!("{}; weakly balanced", floors.join(", "));
    Ok(SmoothnessCertificate::new(t1 + t2 + t3 + t4, t1 + t3 + t4, 0.0, region)
        .with_rho(l - 1.0)
        .conservative())
}

fn activation_constants(act: &ActivationSpec, x_norm: f64, l1: f64, l2: f64) -> Result<(f64, f64, f64)> {
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(LabError::Precondition(format!(
            "regularization must be positive (formulas divide by λ), got λ1={l1}, λ2={l2}"
        )));
    }
    if !(x_norm >= 0.0) {
        return Err(LabError::Precondition(format!("‖X‖ must be ≥ 0, got {x_norm}")));
    }
    let c3 = act.c3.ok_or(LabError::Capability("activation has no bounded second derivative (C3)"))?;
    Ok((act.c1, act.c2, c3))
}

/// Two-layer MSE with L2 regularization; bound H0 + H1·f (baseline 0).
pub fn two_layer_mse_constants(act: &ActivationSpec, x_norm: f64, l1: f64, l2: f64) -> Result<SmoothnessCertificate> {
    let (c1, c2, c3) = activation_constants(act, x_norm, l1, l2)?;
    let x = x_norm;
    let h0 = 4.0 * c2 * x + 2.0 * (l1 + l2);
    let h1 = 4.0 / l1 * (2.0 * c2 * c2 + c3 + 4.0 * c1 * c2) * x * x
        + 8.0 / l2 * (c1 * c1 + 2.0 * c1 * c2) * x * x
        + 2.0 * c3 * x * x
        + 4.0 * c2 * x;
    Ok(SmoothnessCertificate::new(h0, h1, 0.0, "all of R^d").conservative())
}

/// Two-layer logistic loss with L2 regularization; bound H0 + H1·f (baseline 0).
pub fn two_layer_ce_constants(act: &ActivationSpec, x_norm: f64, l1: f64, l2: f64) -> Result<SmoothnessCertificate> {
    let (c1, c2, c3) = activation_constants(act, x_norm, l1, l2)?;
    let x = x_norm;
    let h0 = l1 + l2;
    let h1 = 2.0 / l1 * (c2 * c2 + c3 + 2.0 * c1 * c2) * x * x
        + 2.0 / l2 * (c1 * c1 + 2.0 * c1 * c2) * x * x
        + 2.0 * c2 * x
        + c3 * x * x;
    Ok(SmoothnessCertificate::new(h0, h1, 0.0, "all of R^d").conservative())
}
