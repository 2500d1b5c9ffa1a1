//! Step-size policies: the (H0,H1)-adaptive warm-up, the loss-clipped
//! practical warm-up and the usual baseline shapes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

fn default_theta() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepPolicy {
    Constant {
        eta: f64,
    },
    /// θ / (10·H0 + 20·H1·(f(w_k) − f*))
    TheoreticalAdaptive {
        #[serde(alias = "H0")]
        h0: f64,
        #[serde(alias = "H1")]
        h1: f64,
        #[serde(default = "default_theta")]
        theta: f64,
        #[serde(default)]
        f_star: Option<f64>,
    },
    /// base_k / max{1, loss/C}
    PracticalClipped {
        base: Box<StepPolicy>,
        #[serde(alias = "C")]
        c: f64,
    },
    LinearWarmup {
        peak: f64,
        warmup_iters: usize,
        total_iters: usize,
        floor: f64,
    },
    Wsd {
        peak: f64,
        warmup_iters: usize,
        decay_iters: usize,
        total_iters: usize,
        floor: f64,
    },
    Cosine {
        peak: f64,
        total_iters: usize,
        floor: f64,
    },
}

/// What a policy may consult at step k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepState {
    pub iter: usize,
    /// Full loss for GD, mini-batch loss for SGD.
    pub current_loss: f64,
    pub batch_f_star: Option<f64>,
}

impl StepState {
    pub fn new(iter: usize, current_loss: f64) -> Self {
        StepState { iter, current_loss, batch_f_star: None }
    }
}

/// WSD floor default: 1e-5 of the peak.
pub const WSD_FLOOR_FRACTION: f64 = 1e-5;

impl StepPolicy {
    /// WSD without warm-up, decaying linearly to 1e-5·peak.
    pub fn wsd_default(peak: f64, decay_iters: usize, total_iters: usize) -> Self {
        StepPolicy::Wsd { peak, warmup_iters: 0, decay_iters, total_iters, floor: WSD_FLOOR_FRACTION * peak }
    }

    pub fn adaptive(h0: f64, h1: f64, f_star: f64) -> Self {
        StepPolicy::TheoreticalAdaptive { h0, h1, theta: 1.0, f_star: Some(f_star) }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::Precondition(msg));
        match self {
            StepPolicy::Constant { eta } if !(*eta > 0.0 && eta.is_finite()) => bad(format!("constant step {eta} must be positive")),
            StepPolicy::TheoreticalAdaptive { h0, h1, theta, .. } => {
                if !(*h0 > 0.0 && *h1 >= 0.0 && h0.is_finite() && h1.is_finite()) {
                    bad(format!("adaptive policy needs H0 > 0, H1 ≥ 0, got ({h0}, {h1})"))
                } else if !(*theta > 0.0 && *theta <= 1.0) {
                    bad(format!("θ = {theta} outside (0,1]"))
                } else {
                    Ok(())
                }
            }
            StepPolicy::PracticalClipped { base, c } => {
                if !(*c > 0.0) {
                    return bad(format!("clip level C = {c} must be positive"));
                }
                base.validate()
            }
            StepPolicy::LinearWarmup { peak, warmup_iters, total_iters, floor } => {
                if !(*peak > 0.0 && *floor >= 0.0) || *warmup_iters == 0 || total_iters <= warmup_iters {
                    bad("linear warm-up needs peak > 0, 0 < warmup_iters < total_iters".into())
                } else {
                    Ok(())
                }
            }
            StepPolicy::Wsd { peak, warmup_iters, decay_iters, total_iters, floor } => {
                if !(*peak > 0.0 && *floor >= 0.0) || *decay_iters == 0 || warmup_iters + decay_iters > *total_iters {
                    bad("WSD needs peak > 0, decay_iters ≥ 1 and warmup + decay ≤ total".into())
                } else {
                    Ok(())
                }
            }
            StepPolicy::Cosine { peak, total_iters, floor } => {
                if !(*peak > 0.0 && *floor >= 0.0) || *total_iters < 2 {
                    bad("cosine needs peak > 0 and total_iters ≥ 2".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Number of steps a finite schedule emits.
    pub fn horizon(&self) -> Option<usize> {
        match self {
            StepPolicy::LinearWarmup { total_iters, .. }
            | StepPolicy::Wsd { total_iters, .. }
            | StepPolicy::Cosine { total_iters, .. } => Some(*total_iters),
            StepPolicy::PracticalClipped { base, .. } => base.horizon(),
            _ => None,
        }
    }

    /// Short provenance tag.
    pub fn id(&self) -> String {
        match self {
            StepPolicy::Constant { eta } => format!("constant(eta={eta})"),
            StepPolicy::TheoreticalAdaptive { h0, h1, theta, .. } => {
                format!("adaptive(H0={h0},H1={h1},theta={theta})")
            }
            StepPolicy::PracticalClipped { base, c } => format!("clipped(C={c},{})", base.id()),
            StepPolicy::LinearWarmup { peak, warmup_iters, total_iters, .. } => {
                format!("linear_warmup(peak={peak},warmup={warmup_iters},total={total_iters})")
            }
            StepPolicy::Wsd { peak, warmup_iters, decay_iters, total_iters, .. } => {
                format!("wsd(peak={peak},warmup={warmup_iters},decay={decay_iters},total={total_iters})")
            }
            StepPolicy::Cosine { peak, total_iters, .. } => format!("cosine(peak={peak},total={total_iters})"),
        }
    }
}

fn check_horizon(iter: usize, total: usize) -> Result<()> {
    if iter >= total {
        Err(LabError::OutOfHorizon { iter, total })
    } else {
        Ok(())
    }
}

pub fn step_size(policy: &StepPolicy, state: &StepState) -> Result<f64> {
    if !state.current_loss.is_finite() {
        return Err(LabError::Input(format!("non-finite loss {}", state.current_loss)));
    }
    let k = state.iter;
    let eta = match policy {
        StepPolicy::Constant { eta } => *eta,
        StepPolicy::TheoreticalAdaptive { h0, h1, theta, f_star } => {
            let fs = state.batch_f_star.or(*f_star).ok_or(LabError::Capability(
                "adaptive step needs f*; use the practical clipped policy when it is unknown",
            ))?;
            let gap = state.current_loss - fs;
            if gap < -1e-12 * fs.abs().max(1.0) {
                return Err(LabError::Inconsistent(format!("loss {} below f* = {fs}", state.current_loss)));
            }
            theta / (10.0 * h0 + 20.0 * h1 * gap.max(0.0))
        }
        StepPolicy::PracticalClipped { base, c } => {
            step_size(base, state)? / (state.current_loss / c).max(1.0)
        }
        StepPolicy::LinearWarmup { peak, warmup_iters, total_iters, floor } => {
            check_horizon(k, *total_iters)?;
            if k < *warmup_iters {
                peak * (k + 1) as f64 / *warmup_iters as f64
            } else {
                let span = (*total_iters - *warmup_iters) as f64;
                let t = (k + 1 - *warmup_iters) as f64 / span;
                (1.0 - t) * peak + t * floor
            }
        }
        StepPolicy::Wsd { peak, warmup_iters, decay_iters, total_iters, floor } => {
            check_horizon(k, *total_iters)?;
            let decay_start = total_iters - decay_iters;
            if k < *warmup_iters {
                peak * (k + 1) as f64 / *warmup_iters as f64
            } else if k < decay_start {
                *peak
            } else {
                let t = (k + 1 - decay_start) as f64 / *decay_iters as f64;
                (1.0 - t) * peak + t * floor
            }
        }
        StepPolicy::Cosine { peak, total_iters, floor } => {
            check_horizon(k, *total_iters)?;
            let t = k as f64 / (*total_iters - 1) as f64;
            floor + (peak - floor) * 0.5 * (1.0 + (PI * t).cos())
        }
    };
    Ok(eta)
}

/// Largest constant step that does not diverge on the ExpQuadratic
/// construction started at loss f(w0): 2(log f(w0) + 1)/(f(w0)·H1).
///
/// f(w0) = 1 is accepted; that is the value the runway argument plugs in.
pub fn max_safe_constant_step(f_w0: f64, h1: f64) -> Result<f64> {
    if !(f_w0 >= 1.0) || !(h1 > 0.0) {
        return Err(LabError::Precondition(format!("need f(w0) ≥ 1 and H1 > 0, got ({f_w0}, {h1})")));
    }
    Ok(2.0 * (f_w0.ln() + 1.0) / (f_w0 * h1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn at(p: &StepPolicy, k: usize, loss: f64) -> f64 {
        step_size(p, &StepState::new(k, loss)).unwrap()
    }

    #[test]
    fn adaptive_at_optimum() {
        let p = StepPolicy::adaptive(2.0, 3.0, 0.5);
        assert_eq!(at(&p, 0, 0.5), 1.0 / 20.0);
        assert_eq!(at(&p, 0, 1.5), 1.0 / (20.0 + 60.0));
        let err = step_size(&p, &StepState::new(0, 0.4)).unwrap_err();
        assert!(matches!(err, LabError::Inconsistent(_)));
        let no_star = StepPolicy::TheoreticalAdaptive { h0: 1.0, h1: 1.0, theta: 1.0, f_star: None };
        assert!(matches!(step_size(&no_star, &StepState::new(0, 1.0)), Err(LabError::Capability(_))));
        let s = StepState { iter: 0, current_loss: 1.0, batch_f_star: Some(1.0) };
        assert_eq!(step_size(&no_star, &s).unwrap(), 0.1);
    }

    #[test]
    fn clipped_examples() {
        let p = StepPolicy::PracticalClipped { base: Box::new(StepPolicy::Constant { eta: 1e-3 }), c: 4.0 };
        assert!((at(&p, 0, 8.0) - 5e-4).abs() < 1e-18);
        assert_eq!(at(&p, 0, 3.0), 1e-3);
        for c in [3.5, 4.0, 4.5] {
            let p = StepPolicy::PracticalClipped { base: Box::new(StepPolicy::Constant { eta: 1.0 }), c };
            assert!((at(&p, 0, 9.0) - c / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn max_safe_examples() {
        assert!((max_safe_constant_step(E, 1.0).unwrap() - 4.0 / E).abs() < 1e-15);
        assert!((max_safe_constant_step(E, 2.0).unwrap() - 2.0 / E).abs() < 1e-15);
        let e3 = 3f64.exp();
        assert!((max_safe_constant_step(e3, 1.0).unwrap() - 8.0 / e3).abs() < 1e-15);
        assert_eq!(max_safe_constant_step(1.0, 2.0).unwrap(), 1.0);
        assert!(max_safe_constant_step(0.5, 1.0).is_err());
    }

    #[test]
    fn finite_schedules_end_at_floor() {
        let ps = [
            StepPolicy::LinearWarmup { peak: 1.0, warmup_iters: 3, total_iters: 10, floor: 0.01 },
            StepPolicy::Wsd { peak: 1.0, warmup_iters: 2, decay_iters: 4, total_iters: 10, floor: 0.01 },
            StepPolicy::wsd_default(1.0, 4, 10),
            StepPolicy::Cosine { peak: 1.0, total_iters: 10, floor: 0.01 },
        ];
        for p in &ps {
            p.validate().unwrap();
            let total = p.horizon().unwrap();
            let vals: Vec<f64> = (0..total).map(|k| at(p, k, 1.0)).collect();
            assert_eq!(vals.len(), 10);
            let floor = match p {
                StepPolicy::LinearWarmup { floor, .. } | StepPolicy::Wsd { floor, .. } | StepPolicy::Cosine { floor, .. } => *floor,
                _ => unreachable!(),
            };
            assert!((vals[9] - floor).abs() < 1e-15, "{p:?}");
            assert!(matches!(step_size(p, &StepState::new(10, 1.0)), Err(LabError::OutOfHorizon { .. })));
        }
        let wsd = &ps[2];
        assert_eq!(at(wsd, 0, 1.0), 1.0);
        assert!((at(wsd, 9, 1.0) - 1e-5).abs() < 1e-20);
        let lw = &ps[0];
        assert!((at(lw, 0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(at(lw, 2, 1.0), 1.0);
    }

    #[test]
    fn validation() {
        assert!(StepPolicy::Constant { eta: 0.0 }.validate().is_err());
        assert!(StepPolicy::TheoreticalAdaptive { h0: 1.0, h1: 1.0, theta: 1.5, f_star: None }.validate().is_err());
        assert!(StepPolicy::Cosine { peak: 1.0, total_iters: 1, floor: 0.0 }.validate().is_err());
    }

    #[test]
    fn toml_roundtrip() {
        let p = StepPolicy::PracticalClipped { base: Box::new(StepPolicy::wsd_default(1e-3, 10, 100)), c: 4.0 };
        let s = toml::to_string(&p).unwrap();
        let q: StepPolicy = toml::from_str(&s).unwrap();
        assert_eq!(p, q);
        let r: StepPolicy = toml::from_str("kind = \"theoretical_adaptive\"\nH0 = 1.0\nH1 = 2.0\nf_star = 0.0").unwrap();
        assert_eq!(r, StepPolicy::adaptive(1.0, 2.0, 0.0));
    }

    proptest! {
        #[test]
        fn adaptive_warms_up_as_loss_falls(h0 in 1e-3..1e3f64, h1 in 0.0..1e3f64, theta in 0.01..1.0f64,
                                           mut losses in proptest::collection::vec(0.0..1e6f64, 2..50)) {
            losses.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let p = StepPolicy::TheoreticalAdaptive { h0, h1, theta, f_star: Some(0.0) };
            let steps: Vec<f64> = losses.iter().enumerate().map(|(k, l)| at(&p, k, *l)).collect();
            for w in steps.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-15);
            }
            for s in steps {
                prop_assert!(s > 0.0 && s <= theta / (10.0 * h0));
            }
        }

        #[test]
        fn clip_is_identity_below_c(c in 0.1..10.0f64, frac in 0.0..1.0f64, eta in 1e-6..1.0f64) {
            let p = StepPolicy::PracticalClipped { base: Box::new(StepPolicy::Constant { eta }), c };
            prop_assert_eq!(at(&p, 0, c * frac), eta);
        }
    }
}
