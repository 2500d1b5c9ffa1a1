//! Iteration-count predictors: upper bounds for adaptive GD, lower bounds
//! for constant-step GD.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    UpperAiming,
    UpperPl,
    UpperNonconvex,
    LowerNonconvex,
    LowerConvex,
    LowerPl,
}

impl BoundKind {
    pub const ALL: [BoundKind; 6] = [
        BoundKind::UpperAiming,
        BoundKind::UpperPl,
        BoundKind::UpperNonconvex,
        BoundKind::LowerNonconvex,
        BoundKind::LowerConvex,
        BoundKind::LowerPl,
    ];

    pub fn is_upper(self) -> bool {
        matches!(self, BoundKind::UpperAiming | BoundKind::UpperPl | BoundKind::UpperNonconvex)
    }
}

/// ε is a loss-gap target, except for the nonconvex kinds where it bounds ‖∇f‖.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPrediction {
    pub kind: BoundKind,
    pub iters: f64,
    pub inputs: BoundInputs,
}

fn need(v: Option<f64>, name: &str, kind: BoundKind) -> Result<f64> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => Err(LabError::Input(format!("{kind:?}: {name} = {x} is not finite"))),
        None => Err(LabError::Input(format!("{kind:?} needs input {name}"))),
    }
}

fn positive(x: f64, name: &str) -> Result<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(LabError::Input(format!("{name} must be positive, got {x}")))
    }
}

fn non_negative(x: f64, name: &str) -> Result<f64> {
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(LabError::Input(format!("{name} must be ≥ 0, got {x}")))
    }
}

/// Δ0/(log Δ0 + 1), the factor shared by the lower bounds.
fn lower_prefactor(delta0: f64) -> Result<f64> {
    let den = delta0.ln() + 1.0;
    if !(den > 0.0) {
        return Err(LabError::Input(format!("lower bounds need log Δ0 + 1 > 0, got Δ0 = {delta0}")));
    }
    Ok(delta0 / den)
}

pub fn predict_bound(kind: BoundKind, inputs: BoundInputs) -> Result<BoundPrediction> {
    use BoundKind::*;
    let i = inputs;
    let iters = match kind {
        UpperAiming => {
            let h0 = non_negative(need(i.h0, "H0", kind)?, "H0")?;
            let h1 = non_negative(need(i.h1, "H1", kind)?, "H1")?;
            let eps = positive(need(i.eps, "eps", kind)?, "eps")?;
            let theta = positive(need(i.theta, "theta", kind)?, "theta")?;
            let d2 = non_negative(need(i.dist0, "dist0", kind)?, "dist0")?.powi(2);
            20.0 * h0 * d2 / (theta * theta * eps) + 40.0 * h1 * d2 / (theta * theta)
        }
        UpperPl => {
            let h0 = positive(need(i.h0, "H0", kind)?, "H0")?;
            let h1 = non_negative(need(i.h1, "H1", kind)?, "H1")?;
            let eps = positive(need(i.eps, "eps", kind)?, "eps")?;
            let mu = positive(need(i.mu, "mu", kind)?, "mu")?;
            let delta0 = non_negative(need(i.delta0, "delta0", kind)?, "delta0")?;
            if h1 > 0.0 {
                40.0 * h1 * delta0 / mu + 20.0 * h0 / mu * (h0 / (2.0 * h1 * eps)).ln().max(0.0)
            } else {
                20.0 * h0 / mu * (delta0 / eps).ln().max(0.0)
            }
        }
        UpperNonconvex => {
            let h0 = non_negative(need(i.h0, "H0", kind)?, "H0")?;
            let h1 = non_negative(need(i.h1, "H1", kind)?, "H1")?;
            let eps = positive(need(i.eps, "eps", kind)?, "eps")?;
            let delta0 = non_negative(need(i.delta0, "delta0", kind)?, "delta0")?;
            let scale = 2.0 * h0 + 4.0 * h1 * delta0;
            let damp = if scale > 0.0 { 1.0 + h1 * delta0 / scale } else { 1.0 };
            let k = 20.0 * (h0 + 2.0 * h1 * delta0) * delta0 / (eps * eps * damp);
            k.max(6.0)
        }
        LowerNonconvex => {
            let h1 = non_negative(need(i.h1, "H1", kind)?, "H1")?;
            let eps = positive(need(i.eps, "eps", kind)?, "eps")?;
            let delta0 = positive(need(i.delta0, "delta0", kind)?, "delta0")?;
            (h1 * lower_prefactor(delta0)? * (delta0 - 2.0 * eps * eps) / (8.0 * eps * eps)).max(0.0)
        }
        LowerConvex => {
            let h1 = non_negative(need(i.h1, "H1", kind)?, "H1")?;
            let eps = positive(need(i.eps, "eps", kind)?, "eps")?;
            let delta0 = positive(need(i.delta0, "delta0", kind)?, "delta0")?;
            (h1 * lower_prefactor(delta0)? * (delta0 - eps) / (4.0 * eps)).max(0.0)
        }
        LowerPl => {
            let h1 = non_negative(need(i.h1, "H1", kind)?, "H1")?;
            let eps = positive(need(i.eps, "eps", kind)?, "eps")?;
            let mu = positive(need(i.mu, "mu", kind)?, "mu")?;
            let delta0 = positive(need(i.delta0, "delta0", kind)?, "delta0")?;
            (h1 / (4.0 * mu) * lower_prefactor(delta0)? * (delta0 / eps).ln()).max(0.0)
        }
    };
    Ok(BoundPrediction { kind, iters, inputs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn aiming_example() {
        let p = predict_bound(
            BoundKind::UpperAiming,
            BoundInputs { h0: Some(1.0), h1: Some(0.0), eps: Some(0.1), theta: Some(1.0), dist0: Some(1.0), ..Default::default() },
        )
        .unwrap();
        assert!((p.iters - 200.0).abs() < 1e-9);
    }

    #[test]
    fn lower_examples() {
        let p = predict_bound(
            BoundKind::LowerPl,
            BoundInputs { h1: Some(2.0), mu: Some(0.5), delta0: Some(3.0), eps: Some(3.0), ..Default::default() },
        )
        .unwrap();
        assert_eq!(p.iters, 0.0);
        let p = predict_bound(
            BoundKind::LowerConvex,
            BoundInputs { h1: Some(1.0), delta0: Some(E), eps: Some(E / 2.0), ..Default::default() },
        )
        .unwrap();
        // (e/2)·((e/2)/(2e)) = e/8
        assert!((p.iters - E / 8.0).abs() < 1e-14);
    }

    #[test]
    fn missing_input() {
        assert!(matches!(predict_bound(BoundKind::UpperPl, BoundInputs::default()), Err(LabError::Input(_))));
    }

    #[test]
    fn nonconvex_floor() {
        let p = predict_bound(
            BoundKind::UpperNonconvex,
            BoundInputs { h0: Some(1e-6), h1: Some(0.0), eps: Some(10.0), delta0: Some(1e-3), ..Default::default() },
        )
        .unwrap();
        assert_eq!(p.iters, 6.0);
    }
}
