//! Point samplers for the regions in which certificates are claimed.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::core::ParamPoint;
use crate::error::{LabError, Result};
use crate::problems::{balanced_from_profile, NetObjective};
use crate::rng::{normal_matrix, LabRng};

/// Rejection samplers give up after this many attempts per point.
pub const MAX_ATTEMPTS: usize = 10_000;

pub trait Sampler: Send + Sync {
    fn sample(&self, rng: &mut LabRng) -> Result<Vec<f64>>;
    fn region(&self) -> String;
    fn seed(&self) -> u64 {
        0
    }
}

/// Uniform in the box [lo, hi]^dim.
#[derive(Debug, Clone)]
pub struct BoxSampler {
    pub dim: usize,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
}

impl BoxSampler {
    pub fn new(dim: usize, lo: f64, hi: f64, seed: u64) -> Self {
        BoxSampler { dim, lo, hi, seed }
    }
}

impl Sampler for BoxSampler {
    fn sample(&self, rng: &mut LabRng) -> Result<Vec<f64>> {
        if !(self.hi > self.lo) {
            return Err(LabError::Precondition("empty box".into()));
        }
        Ok((0..self.dim).map(|_| rng.random_range(self.lo..self.hi)).collect())
    }
    fn region(&self) -> String {
        format!("box [{}, {}]^{}", self.lo, self.hi, self.dim)
    }
    fn seed(&self) -> u64 {
        self.seed
    }
}

/// Replays a fixed list of points, cycling.
#[derive(Debug)]
pub struct PointListSampler {
    points: Vec<Vec<f64>>,
    next: AtomicUsize,
    label: String,
}

impl PointListSampler {
    pub fn new(points: Vec<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(LabError::Precondition("no points".into()));
        }
        Ok(PointListSampler { points, next: AtomicUsize::new(0), label: label.into() })
    }
}

impl Sampler for PointListSampler {
    fn sample(&self, _rng: &mut LabRng) -> Result<Vec<f64>> {
        let i = self.next.fetch_add(1, Ordering::Relaxed);
        Ok(self.points[i % self.points.len()].clone())
    }
    fn region(&self) -> String {
        self.label.clone()
    }
}

/// Rejects points too close to a leaky-ReLU kink, where the Hessian is
/// undefined and finite differences straddle two branches.
#[derive(Clone)]
pub struct KinkGuard {
    pub net: Arc<NetObjective>,
    pub margin: f64,
}

impl KinkGuard {
    fn admits(&self, w: &[f64]) -> bool {
        self.net.diagnostics(w).min_abs_preactivation >= self.margin
    }
}

/// Strongly balanced weights with a random singular profile whose common
/// Frobenius norm is uniform in [norm_lo, norm_hi].
#[derive(Clone)]
pub struct BalancedSampler {
    pub dims: Vec<usize>,
    pub norm_lo: f64,
    pub norm_hi: f64,
    pub seed: u64,
    pub kink: Option<KinkGuard>,
}

impl BalancedSampler {
    pub fn new(dims: &[usize], norm_lo: f64, norm_hi: f64, seed: u64) -> Self {
        BalancedSampler { dims: dims.to_vec(), norm_lo, norm_hi, seed, kink: None }
    }
}

fn random_profile(r: usize, target_norm: f64, rng: &mut LabRng) -> Vec<f64> {
    let mut p: Vec<f64> = (0..r).map(|_| rng.random_range(0.2..1.0)).collect();
    let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    p.iter_mut().for_each(|x| *x *= target_norm / n);
    p
}

fn draw_norm(lo: f64, hi: f64, rng: &mut LabRng) -> Result<f64> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(LabError::Precondition(format!("norm range [{lo}, {hi}] must be positive and ordered")));
    }
    Ok(if hi > lo { rng.random_range(lo..hi) } else { lo })
}

impl Sampler for BalancedSampler {
    fn sample(&self, rng: &mut LabRng) -> Result<Vec<f64>> {
        let r = self.dims.iter().copied().min().unwrap_or(0);
        for _ in 0..MAX_ATTEMPTS {
            let s = draw_norm(self.norm_lo, self.norm_hi, rng)?;
            let profile = random_profile(r, s, rng);
            let p = balanced_from_profile(&self.dims, &profile, rng)?.into_data();
            if self.kink.as_ref().is_none_or(|k| k.admits(&p)) {
                return Ok(p);
            }
        }
        Err(LabError::Sampler { attempts: MAX_ATTEMPTS, region: self.region() })
    }
    fn region(&self) -> String {
        "strongly balanced".into()
    }
    fn seed(&self) -> u64 {
        self.seed
    }
}

/// Weakly balanced weights (common Frobenius norm) with per-layer floors
/// λ_min(W_iᵀW_i) ≥ h_i, optionally strongly balanced from layer
/// `strong_from` (0-based) onward. Rejection sampling.
#[derive(Clone)]
pub struct LayerFloorSampler {
    pub dims: Vec<usize>,
    /// One entry per layer; 0 means unconstrained.
    pub floors: Vec<f64>,
    pub strong_from: Option<usize>,
    pub norm_lo: f64,
    pub norm_hi: f64,
    pub seed: u64,
    pub kink: Option<KinkGuard>,
}

impl LayerFloorSampler {
    pub fn new(dims: &[usize], floors: &[f64], norm_lo: f64, norm_hi: f64, seed: u64) -> Result<Self> {
        if floors.len() != dims.len().saturating_sub(1) {
            return Err(LabError::Precondition(format!(
                "{} floors for {} layers",
                floors.len(),
                dims.len().saturating_sub(1)
            )));
        }
        Ok(LayerFloorSampler {
            dims: dims.to_vec(),
            floors: floors.to_vec(),
            strong_from: None,
            norm_lo,
            norm_hi,
            seed,
            kink: None,
        })
    }

    pub fn with_strong_tail(mut self, from: usize) -> Self {
        self.strong_from = Some(from);
        self
    }

    pub fn with_kink_guard(mut self, net: Arc<NetObjective>, margin: f64) -> Self {
        self.kink = Some(KinkGuard { net, margin });
        self
    }

    fn draw(&self, rng: &mut LabRng) -> Result<Vec<DMatrix<f64>>> {
        let s = draw_norm(self.norm_lo, self.norm_hi, rng)?;
        let layers = self.dims.len() - 1;
        let split = self.strong_from.unwrap_or(layers).min(layers);
        let mut mats: Vec<DMatrix<f64>> = self.dims[..=split]
            .windows(2)
            .map(|p| {
                let m = normal_matrix(p[0], p[1], rng);
                let n = m.norm();
                m * (s / n)
            })
            .collect();
        if split < layers {
            let tail = &self.dims[split..];
            let r = tail.iter().copied().min().unwrap_or(0);
            let p = balanced_from_profile(tail, &random_profile(r, s, rng), rng)?;
            mats.extend(p.matrices());
        }
        Ok(mats)
    }
}

fn lambda_min_gram(w: &DMatrix<f64>) -> f64 {
    (w.transpose() * w).symmetric_eigenvalues().min()
}

impl Sampler for LayerFloorSampler {
    fn sample(&self, rng: &mut LabRng) -> Result<Vec<f64>> {
        if self.dims.len() < 2 {
            return Err(LabError::Precondition("need at least one layer".into()));
        }
        for _ in 0..MAX_ATTEMPTS {
            let mats = self.draw(rng)?;
            let ok = mats.iter().zip(&self.floors).all(|(m, &h)| h <= 0.0 || lambda_min_gram(m) >= h);
            if !ok {
                continue;
            }
            let p = ParamPoint::from_matrices(&mats).into_data();
            if self.kink.as_ref().is_none_or(|k| k.admits(&p)) {
                return Ok(p);
            }
        }
        Err(LabError::Sampler { attempts: MAX_ATTEMPTS, region: self.region() })
    }
    fn region(&self) -> String {
        let floors: Vec<String> = self
            .floors
            .iter()
            .enumerate()
            .filter(|(_, h)| **h > 0.0)
            .map(|(i, h)| format!("λ_min(W{}ᵀW{}) ≥ {h}", i + 1, i + 1))
            .collect();
        let mut s = format!("weakly balanced; {}", floors.join(", "));
        if let Some(k) = self.strong_from {
            s.push_str(&format!("; layers {}.. strongly balanced", k + 1));
        }
        s
    }
    fn seed(&self) -> u64 {
        self.seed
    }
}
