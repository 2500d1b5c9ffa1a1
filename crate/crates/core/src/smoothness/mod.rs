//! Empirical smoothness: trajectory secants, Hessian spectral norms, linear
//! (H0,H1) fits and certificate verification over sampled regions.

mod samplers;

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{default_fd_step, dense_hessian_fd, finite_diff_hvp, norm, Objective};
use crate::error::{LabError, Result};
use crate::optimize::Trajectory;
use crate::problems::SmoothnessCertificate;
use crate::rng::{normal_vec, seeded};

pub use samplers::{BalancedSampler, BoxSampler, LayerFloorSampler, PointListSampler, Sampler};

/// Dimension up to which spectral norms come from a full eigensolve.
pub const DENSE_DIM_CAP: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TrajectorySecant,
    PowerIteration,
    DenseEig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessSample {
    pub iter: usize,
    /// f(w) − f*, or the raw loss when f* is unknown.
    pub loss_gap: f64,
    pub smoothness: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecantMode {
    /// Full gradients at both iterates.
    Deterministic,
    /// ‖∇f_{S_{k+1}}(w_{k+1}) − ∇f_{S_k}(w_k)‖ from the recorded batches —
    /// the two gradients an SGD loop computes anyway.
    Stochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessTrace {
    pub samples: Vec<SmoothnessSample>,
    /// Steps shorter than 1e-14 that were skipped.
    pub skipped: usize,
}

pub const MIN_SECANT_STEP: f64 = 1e-14;

fn loss_gap(obj: &dyn Objective, f: f64) -> f64 {
    match obj.f_star() {
        Some(fs) => (f - fs).max(0.0),
        None => f,
    }
}

pub fn local_smoothness_trace(obj: &dyn Objective, traj: &Trajectory, mode: SecantMode) -> Result<SmoothnessTrace> {
    if mode == SecantMode::Stochastic && traj.batches.len() < traj.records.len().saturating_sub(1) {
        return Err(LabError::Capability("stochastic secants need recorded mini-batches"));
    }
    let mut samples = Vec::new();
    let mut skipped = 0;
    for pair in traj.snapshots.windows(2) {
        let ((k, w0), (k1, w1)) = (&pair[0], &pair[1]);
        if *k1 != k + 1 {
            continue;
        }
        let dw: Vec<f64> = w1.iter().zip(w0).map(|(a, b)| a - b).collect();
        let step = norm(&dw);
        if step < MIN_SECANT_STEP {
            skipped += 1;
            continue;
        }
        let (g0, g1) = match mode {
            SecantMode::Deterministic => (obj.gradient(w0), obj.gradient(w1)),
            SecantMode::Stochastic => match traj.batches.get(*k1) {
                Some(b1) => (obj.batch_value_grad(&traj.batches[*k], w0).1, obj.batch_value_grad(b1, w1).1),
                None => continue,
            },
        };
        let dg: Vec<f64> = g1.iter().zip(&g0).map(|(a, b)| a - b).collect();
        samples.push(SmoothnessSample {
            iter: *k,
            loss_gap: loss_gap(obj, traj.records[*k].f),
            smoothness: norm(&dg) / step,
            method: Method::TrajectorySecant,
        });
    }
    Ok(SmoothnessTrace { samples, skipped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub value: f64,
    pub converged: bool,
    pub iters: usize,
    pub method: Method,
}

fn apply_hessian(obj: &dyn Objective, w: &[f64], v: &[f64], exact: Option<&DMatrix<f64>>) -> Result<Vec<f64>> {
    match exact {
        Some(h) => Ok((h * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec()),
        None => finite_diff_hvp(obj, w, v, default_fd_step(w)),
    }
}

/// Power iteration on the Hessian (finite-difference products unless a
/// closed form exists), two independent random starts, larger estimate wins.
///
/// The estimate is ‖Hv‖ for unit v — the square root of the Rayleigh
/// quotient of H² — so eigenvalues of either sign are captured.
pub fn power_iteration_norm(obj: &dyn Objective, w: &[f64], tol: f64, max_iters: usize, seed: u64) -> Result<SpectralEstimate> {
    if !(tol > 0.0) {
        return Err(LabError::Precondition("tolerance must be positive".into()));
    }
    let exact = obj.hessian(w);
    let mut rng = seeded(seed);
    let mut best = SpectralEstimate { value: 0.0, converged: true, iters: 0, method: Method::PowerIteration };
    for restart in 0..2 {
        let mut v = normal_vec(w.len(), &mut rng);
        let n = norm(&v);
        v.iter_mut().for_each(|x| *x /= n);
        let mut est = 0.0;
        let mut converged = false;
        let mut iters = 0;
        for it in 1..=max_iters {
            iters = it;
            let hv = apply_hessian(obj, w, &v, exact.as_ref())?;
            let next = norm(&hv);
            if next == 0.0 {
                est = 0.0;
                converged = true;
                break;
            }
            v = hv.into_iter().map(|x| x / next).collect();
            let done = (next - est).abs() < tol * next;
            est = next;
            if done {
                converged = true;
                break;
            }
        }
        if restart == 0 || est > best.value {
            best = SpectralEstimate { value: est, converged, iters, method: Method::PowerIteration };
        }
    }
    Ok(best)
}

/// Largest |eigenvalue| of the (closed-form or finite-difference) Hessian.
pub fn dense_spectral_norm(obj: &dyn Objective, w: &[f64]) -> Result<SpectralEstimate> {
    let h = match obj.hessian(w) {
        Some(h) => h,
        None => dense_hessian_fd(obj, w, default_fd_step(w))?,
    };
    let value = h.symmetric_eigenvalues().iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    Ok(SpectralEstimate { value, converged: true, iters: 1, method: Method::DenseEig })
}

/// ‖∇²f(w)‖₂: dense eigensolve up to dimension 50, power iteration above.
pub fn hessian_spectral_norm(obj: &dyn Objective, w: &[f64], tol: f64, max_iters: usize) -> Result<SpectralEstimate> {
    if !(tol > 0.0) {
        return Err(LabError::Precondition("tolerance must be positive".into()));
    }
    if obj.dim() <= DENSE_DIM_CAP {
        dense_spectral_norm(obj, w)
    } else {
        power_iteration_norm(obj, w, tol, max_iters, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    Ols,
    /// OLS slope, intercept raised until no sample lies above the line.
    Envelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H0H1Fit {
    pub h0_hat: f64,
    pub h1_hat: f64,
    pub r_squared: f64,
    /// Largest amount by which a sample exceeds the line.
    pub max_violation: f64,
    pub mode: FitMode,
    pub rho: f64,
    /// Unclipped OLS slope, kept to tell a flat fit from a negative trend.
    pub raw_slope: f64,
    pub n: usize,
}

/// Keeps samples whose loss gap lies in [lo, hi].
pub fn filter_window(samples: &[SmoothnessSample], lo: f64, hi: f64) -> Vec<SmoothnessSample> {
    samples.iter().filter(|s| s.loss_gap >= lo && s.loss_gap <= hi).cloned().collect()
}

pub fn fit_h0h1(samples: &[SmoothnessSample], mode: FitMode, rho: f64) -> Result<H0H1Fit> {
    if samples.len() < 3 {
        return Err(LabError::Fit(format!("need at least 3 samples, got {}", samples.len())));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.loss_gap.max(0.0).powf(rho)).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.smoothness).collect();
    if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
        return Err(LabError::Fit("non-finite sample".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 1e-300) || xs.iter().all(|x| *x == xs[0]) {
        return Err(LabError::Fit("degenerate design: all loss gaps equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let raw_slope = sxy / sxx;
    let (mut h0, mut h1) = (my - raw_slope * mx, raw_slope);
    if h1 <= 0.0 {
        h1 = 0.0;
        h0 = my.max(0.0);
    } else if h0 < 0.0 {
        h0 = 0.0;
        h1 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / xs.iter().map(|x| x * x).sum::<f64>();
        h1 = h1.max(0.0);
    }
    let ols_h0 = h0;
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - ols_h0 - h1 * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    let violation = |h0: f64| xs.iter().zip(&ys).map(|(x, y)| y - (h0 + h1 * x)).fold(f64::NEG_INFINITY, f64::max);
    if mode == FitMode::Envelope {
        h0 = h0.max(violation(0.0));
        let v = violation(h0);
        if v > 0.0 {
            h0 += 2.0 * v;
        }
    }
    Ok(H0H1Fit { h0_hat: h0, h1_hat: h1, r_squared, max_violation: violation(h0), mode, rho, raw_slope, n: samples.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub point: Vec<f64>,
    pub f: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub objective: String,
    pub region: String,
    pub n_points: usize,
    pub violations: Vec<Violation>,
    /// max over points of ‖∇²f‖ / (H0 + H1·gap^ρ)
    pub max_ratio: f64,
    pub non_converged: usize,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tolerance used by certificate checks: 1e-6·(1 + H0).
pub fn default_cert_tol(cert: &SmoothnessCertificate) -> f64 {
    1e-6 * (1.0 + cert.h0)
}

/// Checks ‖∇²f(w)‖₂ ≤ H0 + H1·(f(w) − f*)^ρ + tol at sampled points.
/// `n` points from the sampler, seeded from the sampler's own seed.
pub fn draw_points(sampler: &dyn Sampler, n: usize) -> Result<Vec<Vec<f64>>> {
    let mut rng = seeded(sampler.seed());
    (0..n).map(|_| sampler.sample(&mut rng)).collect()
}

pub fn verify_certificate(
    obj: &dyn Objective,
    cert: &SmoothnessCertificate,
    sampler: &dyn Sampler,
    n_points: usize,
    tol: f64,
) -> Result<CertificateReport> {
    cert.validate()?;
    let points = draw_points(sampler, n_points)?;
    let evals: Vec<(f64, SpectralEstimate)> = points
        .par_iter()
        .map(|w| Ok((obj.value(w), hessian_spectral_norm(obj, w, 1e-10, 5000)?)))
        .collect::<Result<_>>()?;
    let mut violations = Vec::new();
    let mut max_ratio = 0.0_f64;
    let mut non_converged = 0;
    for (i, (w, (f, est))) in points.iter().zip(evals).enumerate() {
        let rhs = cert.bound(f);
        if !est.converged {
            non_converged += 1;
        }
        max_ratio = max_ratio.max(est.value / rhs.max(f64::MIN_POSITIVE));
        if est.value > rhs + tol || !est.value.is_finite() {
            violations.push(Violation { index: i, point: w.clone(), f, lhs: est.value, rhs, excess: est.value - rhs });
        }
    }
    Ok(CertificateReport {
        objective: obj.name(),
        region: sampler.region(),
        n_points,
        violations,
        max_ratio,
        non_converged,
    })
}

/// Checks ‖∇²f(w)‖₂ ≤ L0 + L1‖∇f(w)‖ at the given points.
pub fn verify_l0l1(obj: &dyn Objective, l0: f64, l1: f64, points: &[Vec<f64>]) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    for (i, w) in points.iter().enumerate() {
        let lhs = hessian_spectral_norm(obj, w, 1e-10, 5000)?.value;
        let rhs = l0 + l1 * norm(&obj.gradient(w));
        if lhs > rhs {
            out.push(Violation { index: i, point: w.clone(), f: obj.value(w), lhs, rhs, excess: lhs - rhs });
        }
    }
    Ok(out)
}

pub const TRACE_COLUMNS: [&str; 4] = ["iter", "loss_gap", "smoothness", "method"];

pub fn write_trace_csv<W: Write>(samples: &[SmoothnessSample], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(TRACE_COLUMNS)?;
    for s in samples {
        let method = match s.method {
            Method::TrajectorySecant => "trajectory_secant",
            Method::PowerIteration => "power_iteration",
            Method::DenseEig => "dense_eig",
        };
        wtr.write_record([s.iter.to_string(), s.loss_gap.to_string(), s.smoothness.to_string(), method.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
