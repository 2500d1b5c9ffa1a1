//! Canned experiments: desk-scale analogues of the warm-up arguments, each
//! producing typed results plus a markdown report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::config::ProblemSpec;
use super::registry::build_problem;
use crate::core::Objective;
use crate::error::{LabError, Result};
use crate::optimize::{run_gd, run_sgd, StopReason, StopRule, Trajectory};
use crate::problems::{
    make_counterexample, make_exp_quadratic, make_runway, CounterexampleKind, Quadratic, SumObjective,
    AffineComposition, Witness,
};
use crate::rng::{normal_matrix, seeded};
use crate::schedules::{max_safe_constant_step, step_size, StepPolicy, StepState};
use crate::smoothness::{
    default_cert_tol, fit_h0h1, local_smoothness_trace, verify_certificate, write_trace_csv, BoxSampler,
    CertificateReport, FitMode, H0H1Fit, SecantMode, SmoothnessSample,
};
use crate::theory::{affine_params, predict_bound, sum_params, BoundInputs, BoundKind};

pub const EXPERIMENTS: &[&str] =
    &["smoothness-vs-loss", "warmup-vs-constant", "lower-bound-demo", "closure-demo", "practical-warmup"];

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub name: String,
    pub markdown: String,
    pub files: Vec<PathBuf>,
}

/// Runs a registered experiment and writes `report.md` (plus any data
/// files) under `<out_root>/experiments/<name>/`.
pub fn cli_experiment(name: &str, out_root: &Path) -> Result<ExperimentReport> {
    let dir = out_root.join("experiments").join(name);
    let mut files = Vec::new();
    let markdown = match name {
        "smoothness-vs-loss" => {
            let r = smoothness_vs_loss(&SmoothnessVsLossSetup::default())?;
            fs::create_dir_all(&dir)?;
            let trace = dir.join("smoothness_trace.csv");
            write_trace_csv(&r.samples, fs::File::create(&trace)?)?;
            let fits = dir.join("fits.json");
            fs::write(&fits, serde_json::to_string_pretty(&(&r.ols, &r.envelope, &r.window))?)?;
            files.extend([trace, fits]);
            r.to_markdown()
        }
        "warmup-vs-constant" => warmup_vs_constant(5.0, 1e-3)?.to_markdown(),
        "lower-bound-demo" => lower_bound_demo()?.to_markdown(),
        "closure-demo" => closure_demo(500)?.to_markdown(),
        "practical-warmup" => {
            let r = practical_warmup()?;
            fs::create_dir_all(&dir)?;
            let steps = dir.join("effective_lr.csv");
            fs::write(&steps, r.steps_csv())?;
            files.push(steps);
            r.to_markdown()
        }
        other => {
            return Err(LabError::Config(format!(
                "unknown experiment '{other}'; available: {}",
                EXPERIMENTS.join(", ")
            )))
        }
    };
    fs::create_dir_all(&dir)?;
    let report = dir.join("report.md");
    fs::write(&report, &markdown)?;
    files.insert(0, report);
    Ok(ExperimentReport { name: name.into(), markdown, files })
}

fn fmt_count(c: Option<usize>, cap: usize) -> String {
    match c {
        Some(k) => k.to_string(),
        None => format!("> {cap} (not reached)"),
    }
}

/// Iterations until the loss gap first drops to `eps`.
fn iters_to_gap(traj: &Trajectory, f_star: f64, eps: f64) -> Option<usize> {
    traj.first_iter_where(|r| r.f - f_star <= eps)
}

// ---------------------------------------------------------------- warm-up

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantRun {
    pub factor: f64,
    pub eta: f64,
    pub iters: Option<usize>,
    pub stop: StopReason,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarmupComparison {
    pub h1: f64,
    pub m: f64,
    pub delta0: f64,
    pub eps: f64,
    pub cap: usize,
    pub adaptive_iters: Option<usize>,
    pub max_safe_eta: f64,
    /// factor 1.0 is the maximal safe constant step; the others show how
    /// sensitive the comparison is to sitting exactly at the threshold.
    pub constant: Vec<ConstantRun>,
    /// Fastest constant step on a grid of fractions of the threshold.
    pub best_constant: ConstantRun,
    pub upper_aiming: f64,
    pub lower_convex: f64,
}

impl WarmupComparison {
    /// Whether the adaptive policy needs no more iterations than the best
    /// safe constant step.
    pub fn adaptive_beats_best_constant(&self) -> bool {
        match (self.adaptive_iters, self.best_constant.iters) {
            (Some(a), Some(c)) => a <= c,
            (Some(_), None) => true,
            (None, _) => false,
        }
    }

    pub fn at_threshold(&self) -> &ConstantRun {
        self.constant.iter().find(|c| c.factor == 1.0).expect("threshold run present")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "# warmup-vs-constant\n\nExpQuadratic with H1 = {}, M = e^{:.0} (Δ0 = {:.4}), target gap ε = {:e}, cap {} iterations.\n\n\
             | policy | step | iterations to ε | stop |\n|---|---|---|---|\n",
            self.h1,
            self.m.ln(),
            self.delta0,
            self.eps,
            self.cap
        );
        let _ = writeln!(s, "| adaptive (H0,H1) | 1/(10H0 + 20H1·gap) | {} | |", fmt_count(self.adaptive_iters, self.cap));
        for c in &self.constant {
            let _ = writeln!(
                s,
                "| constant {}× max safe | {:.6} | {} | {:?} |",
                c.factor,
                c.eta,
                fmt_count(c.iters, self.cap),
                c.stop
            );
        }
        let b = &self.best_constant;
        let _ = write!(
            s,
            "| best safe constant ({:.3}× on a grid of 1000) | {:.6} | {} | {:?} |\n\n\
             Predicted: adaptive ≤ {:.1} (upper, aiming θ=1); constant ≥ {:.1} (lower, convex case).\n\
             Adaptive ≤ best safe constant: {}.\n\n\
             At exactly the maximal safe step the iterates alternate ±w0 (a 2-cycle) and never reach ε. \
             In one dimension a well-chosen constant step can land next to the minimiser in a single jump, \
             so the best constant step beats the adaptive one here; the lower bound concerns worst-case \
             functions, not this instance.\n",
            b.factor,
            b.eta,
            fmt_count(b.iters, self.cap),
            b.stop,
            self.upper_aiming,
            self.lower_convex,
            self.adaptive_beats_best_constant()
        );
        s
    }
}

/// ExpQuadratic with H1 = 1, M = e^{log_m}: adaptive GD against constant
/// steps at (and just below) the maximal safe constant step.
pub fn warmup_vs_constant(log_m: f64, eps: f64) -> Result<WarmupComparison> {
    let f = make_exp_quadratic(1.0, log_m.exp())?;
    let cert = f.certificate().rebased(0.5)?;
    let w0 = [f.w0()];
    let cap = 100_000;
    let stop = StopRule::iters(cap).with_loss_tol(eps);
    let adaptive = run_gd(&f, &w0, &StepPolicy::adaptive(cert.h0, cert.h1, 0.5), &stop)?;
    let max_safe = max_safe_constant_step(f.m, f.h1)?;
    let mut constant = Vec::new();
    for factor in [1.0, 0.999, 0.9, 0.5, 0.1] {
        let eta = factor * max_safe;
        let t = run_gd(&f, &w0, &StepPolicy::Constant { eta }, &stop)?;
        constant.push(ConstantRun { factor, eta, iters: iters_to_gap(&t, 0.5, eps), stop: t.stop_reason });
    }
    let mut best_constant: Option<ConstantRun> = None;
    for i in 1..=1000 {
        let factor = i as f64 / 1000.0;
        let eta = factor * max_safe;
        let t = run_gd(&f, &w0, &StepPolicy::Constant { eta }, &stop)?;
        let run = ConstantRun { factor, eta, iters: iters_to_gap(&t, 0.5, eps), stop: t.stop_reason };
        let better = match (&best_constant, run.iters) {
            (None, _) => true,
            (Some(b), Some(k)) => b.iters.is_none_or(|bk| k < bk),
            (Some(_), None) => false,
        };
        if better {
            best_constant = Some(run);
        }
    }
    let delta0 = f.m - 0.5;
    let upper = predict_bound(
        BoundKind::UpperAiming,
        BoundInputs {
            h0: Some(cert.h0),
            h1: Some(cert.h1),
            eps: Some(eps),
            theta: Some(1.0),
            dist0: Some(w0[0].abs()),
            ..Default::default()
        },
    )?;
    let lower = predict_bound(
        BoundKind::LowerConvex,
        BoundInputs { h1: Some(cert.h1), delta0: Some(delta0), eps: Some(eps), ..Default::default() },
    )?;
    Ok(WarmupComparison {
        h1: f.h1,
        m: f.m,
        delta0,
        eps,
        cap,
        adaptive_iters: iters_to_gap(&adaptive, 0.5, eps),
        max_safe_eta: max_safe,
        constant,
        best_constant: best_constant.expect("grid is non-empty"),
        upper_aiming: upper.iters,
        lower_convex: lower.iters,
    })
}

// ---------------------------------------------------------- lower bounds

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunwayCount {
    pub h0: f64,
    pub h1: f64,
    pub delta: f64,
    pub eps: f64,
    pub eta: f64,
    pub predicted: f64,
    pub measured: Option<usize>,
    pub cap: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdCheck {
    pub h1: f64,
    pub m: f64,
    pub max_safe_eta: f64,
    /// |w_k| along the run at 1.1× the threshold, up to the divergence guard.
    pub above_abs_w: Vec<f64>,
    pub above_stop: StopReason,
    pub above_strictly_increasing: bool,
    pub below_iters: usize,
    pub below_stop: StopReason,
}

impl ThresholdCheck {
    /// Update steps taken at 1.1× before the run left f64 range.
    pub fn above_steps(&self) -> usize {
        self.above_abs_w.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundDemo {
    pub runway: RunwayCount,
    pub threshold: ThresholdCheck,
}

impl LowerBoundDemo {
    pub fn to_markdown(&self) -> String {
        let r = &self.runway;
        let t = &self.threshold;
        format!(
            "# lower-bound-demo\n\n## Runway counting\n\nRunway(H0 = {}, H1 = {}, δ = {}), constant step η = {} (the safe threshold at f(w0) = 1), target ‖∇f‖ ≤ {}.\n\n\
             | measured iterations | predicted lower bound | measured ≥ predicted |\n|---|---|---|\n| {} | {:.2} | {} |\n\n\
             ## Step-size threshold\n\nExpQuadratic(H1 = {}, M = e^{:.0}), max safe constant step {:.6}.\n\n\
             | step | outcome | steps | |w_k| strictly increasing |\n|---|---|---|---|\n\
             | 1.1× | {:?} | {} | {} |\n| 0.5× | {:?} | {} | |\n\n\
             |w_k| at 1.1×: {:?}. Iterates grow doubly exponentially, so f64 overflows after a handful of steps.\n",
            r.h0,
            r.h1,
            r.delta,
            r.eta,
            r.eps,
            fmt_count(r.measured, r.cap),
            r.predicted,
            r.measured.map_or(true, |m| m as f64 >= r.predicted),
            t.h1,
            t.m.ln(),
            t.max_safe_eta,
            t.above_stop,
            t.above_steps(),
            t.above_strictly_increasing,
            t.below_stop,
            t.below_iters,
            t.above_abs_w
        )
    }
}

pub fn runway_count(h0: f64, h1: f64, eps: f64) -> Result<RunwayCount> {
    let delta = 2.0 * eps * eps;
    let f = make_runway(h0, h1, delta)?;
    let w0 = [f.x2];
    let f0 = f.value(&w0);
    let eta = max_safe_constant_step(f0, h1)?;
    let cap = 1_000_000;
    let t = run_gd(&f, &w0, &StepPolicy::Constant { eta }, &StopRule::iters(cap).with_grad_tol(eps))?;
    let measured = (t.stop_reason == StopReason::GradTol).then(|| t.iterations());
    let predicted = predict_bound(
        BoundKind::LowerNonconvex,
        BoundInputs { h1: Some(h1), delta0: Some(f0), eps: Some(eps), ..Default::default() },
    )?
    .iters;
    Ok(RunwayCount { h0, h1, delta, eps, eta, predicted, measured, cap })
}

pub fn threshold_check(h1: f64, log_m: f64) -> Result<ThresholdCheck> {
    let f = make_exp_quadratic(h1, log_m.exp())?;
    let w0 = [f.w0()];
    let max_safe = max_safe_constant_step(f.m, h1)?;
    let above = run_gd(&f, &w0, &StepPolicy::Constant { eta: 1.1 * max_safe }, &StopRule::iters(10_000))?;
    let abs_w: Vec<f64> = above.snapshots.iter().map(|(_, w)| w[0].abs()).filter(|x| x.is_finite()).collect();
    let increasing = abs_w.windows(2).all(|p| p[1] > p[0]);
    let below = run_gd(&f, &w0, &StepPolicy::Constant { eta: 0.5 * max_safe }, &StopRule::iters(10_000))?;
    Ok(ThresholdCheck {
        h1,
        m: f.m,
        max_safe_eta: max_safe,
        above_abs_w: abs_w,
        above_stop: above.stop_reason,
        above_strictly_increasing: increasing,
        below_iters: below.iterations(),
        below_stop: below.stop_reason,
    })
}

pub fn lower_bound_demo() -> Result<LowerBoundDemo> {
    Ok(LowerBoundDemo { runway: runway_count(1.0, 2.0, 0.05)?, threshold: threshold_check(1.0, 3.0)? })
}

// --------------------------------------------------------------- closure

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClosureDemo {
    pub sum: CertificateReport,
    pub affine_quadratic: CertificateReport,
    pub affine_exp: CertificateReport,
    pub sum_sin_ratios: Vec<f64>,
    pub affine_cos_ratios: Vec<f64>,
    pub two_layer_witness: Witness,
    pub balanced_witness: Option<Witness>,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[1] > p[0])
}

impl ClosureDemo {
    pub fn ratios_increasing(&self) -> bool {
        strictly_increasing(&self.sum_sin_ratios) && strictly_increasing(&self.affine_cos_ratios)
    }

    pub fn to_markdown(&self) -> String {
        let row = |name: &str, r: &CertificateReport| {
            format!("| {name} | {} | {} | {:.4} |\n", r.n_points, r.violations.len(), r.max_ratio)
        };
        let mut s = String::from(
            "# closure-demo\n\n## Closure certificates\n\n| construction | points | violations | max ‖∇²f‖/bound |\n|---|---|---|---|\n",
        );
        s += &row("sum: w² + exp-quadratic", &self.sum);
        s += &row("affine: ½‖Aw‖², A ∈ R^{3×2}", &self.affine_quadratic);
        s += &row("affine: exp-quadratic(2w + 1)", &self.affine_exp);
        let _ = write!(
            s,
            "\n## Counterexamples to (L0,L1)-smoothness\n\n\
             ‖∇²f‖/(1 + ‖∇f‖) along the witness families, m = 1…{}: strictly increasing = {}.\n\n\
             | family | m = 1 | m = 10 | m = {} |\n|---|---|---|---|\n\
             | sum of sin(w²) terms | {:.3e} | {:.3e} | {:.3e} |\n| cos·exp ∘ affine | {:.3e} | {:.3e} | {:.3e} |\n\n",
            self.sum_sin_ratios.len(),
            self.ratios_increasing(),
            self.sum_sin_ratios.len(),
            self.sum_sin_ratios[0],
            self.sum_sin_ratios[9],
            self.sum_sin_ratios[self.sum_sin_ratios.len() - 1],
            self.affine_cos_ratios[0],
            self.affine_cos_ratios[9],
            self.affine_cos_ratios[self.affine_cos_ratios.len() - 1],
        );
        let w = &self.two_layer_witness;
        let _ = writeln!(s, "| witness | m | ‖∇f‖ | ‖∇²f‖ |\n|---|---|---|---|");
        let _ = writeln!(s, "| two-layer, L2-regularised | {} | {:.3e} | {:.3e} |", w.m, w.grad_norm, w.hess_norm);
        match &self.balanced_witness {
            Some(w) => {
                let _ = writeln!(s, "| two-layer, weakly balanced | {} | {:.3e} | {:.3e} |", w.m, w.grad_norm, w.hess_norm);
            }
            None => s += "| two-layer, weakly balanced | – | no witness found | |\n",
        }
        s
    }
}

/// Witness thresholds used by the demo: Hessian norm at least 1e3 while the
/// gradient norm stays at most 1e-8.
pub const WITNESS_HESS: f64 = 1e3;
pub const WITNESS_GRAD: f64 = 1e-8;

pub fn closure_demo(n_points: usize) -> Result<ClosureDemo> {
    let quad = Arc::new(Quadratic::diagonal(&[2.0]));
    let expq = Arc::new(make_exp_quadratic(1.0, 10.0)?);
    let exp_cert = expq.certificate().rebased(0.5)?;

    // both minimised at 0, so h* = 0 + 1/2
    let sum_cert = sum_params(&quad.certificate(), &exp_cert, 0.5)?;
    let sum = SumObjective::new(quad.clone(), expq.clone())?;
    let sum_report = verify_certificate(&sum, &sum_cert, &BoxSampler::new(1, -4.0, 4.0, 11), n_points, default_cert_tol(&sum_cert))?;

    let a = normal_matrix(3, 2, &mut seeded(12));
    let g = Arc::new(Quadratic::isotropic(3, 1.0));
    let aff = AffineComposition::new(g.clone(), a.clone(), DVector::zeros(3))?;
    let aff_cert = affine_params(&g.certificate(), &a, 0.0)?;
    let aff_report = verify_certificate(&aff, &aff_cert, &BoxSampler::new(2, -3.0, 3.0, 13), n_points, default_cert_tol(&aff_cert))?;

    let two = DMatrix::from_element(1, 1, 2.0);
    let aff_e = AffineComposition::new(expq.clone(), two.clone(), DVector::from_element(1, 1.0))?;
    let aff_e_cert = affine_params(&exp_cert, &two, 0.5)?;
    let aff_e_report =
        verify_certificate(&aff_e, &aff_e_cert, &BoxSampler::new(1, -3.0, 3.0, 14), n_points, default_cert_tol(&aff_e_cert))?;

    let ratios = |kind| -> Result<Vec<f64>> {
        let c = make_counterexample(kind)?;
        Ok((1..=50).map(|m| c.witness(m).ratio()).collect())
    };
    let d1 = make_counterexample(CounterexampleKind::TwoLayerL2 { lambda1: 1e-10, lambda2: 0.1 })?;
    let two_layer_witness = (1..=1000)
        .map(|m| d1.witness(m))
        .find(|w| w.hess_norm >= WITNESS_HESS && w.grad_norm <= WITNESS_GRAD)
        .unwrap_or_else(|| d1.witness(1000));
    let d2 = make_counterexample(CounterexampleKind::BalancedTwoLayer { b: 1.0 })?;
    let balanced_witness =
        (1..=200).map(|m| d2.witness(m)).find(|w| w.hess_norm >= WITNESS_HESS && w.grad_norm <= WITNESS_GRAD);

    Ok(ClosureDemo {
        sum: sum_report,
        affine_quadratic: aff_report,
        affine_exp: aff_e_report,
        sum_sin_ratios: ratios(CounterexampleKind::SumSinSquare)?,
        affine_cos_ratios: ratios(CounterexampleKind::AffineCosExp)?,
        two_layer_witness,
        balanced_witness,
    })
}

// ---------------------------------------------------- smoothness vs loss

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothnessVsLossSetup {
    pub d: usize,
    pub hidden: usize,
    pub m: usize,
    pub eta: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub init_scale: f64,
    pub seed: u64,
    /// Mini-batch sizes whose mixed-batch secant fits are reported alongside.
    pub compare_batches: Vec<usize>,
}

impl Default for SmoothnessVsLossSetup {
    fn default() -> Self {
        SmoothnessVsLossSetup {
            d: 4,
            hidden: 16,
            m: 64,
            eta: 1e-4,
            steps: 2000,
            batch_size: 64,
            init_scale: 2.0,
            seed: 0,
            compare_batches: vec![8, 32],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchFit {
    pub batch_size: usize,
    pub slope: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothnessVsLoss {
    pub setup: SmoothnessVsLossSetup,
    pub samples: Vec<SmoothnessSample>,
    pub ols: H0H1Fit,
    pub envelope: H0H1Fit,
    /// OLS on the upper half of the loss range, excluding the late phase.
    pub window: Option<H0H1Fit>,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub comparisons: Vec<BatchFit>,
}

impl SmoothnessVsLoss {
    pub fn to_markdown(&self) -> String {
        let s = &self.setup;
        let mut out = format!(
            "# smoothness-vs-loss\n\nTwo-layer tanh MSE (d = {}, hidden = {}, m = {}), SGD with constant η = {:e}, {} steps, batch {}; \
             loss {:.2} → {:.2}; {} secant samples.\n\n| fit | H0 | H1 | R² | max violation |\n|---|---|---|---|---|\n",
            s.d,
            s.hidden,
            s.m,
            s.eta,
            s.steps,
            s.batch_size,
            self.initial_loss,
            self.final_loss,
            self.samples.len()
        );
        let mut row = |name: &str, f: &H0H1Fit| {
            let _ = writeln!(out, "| {name} | {:.4} | {:.5} | {:.3} | {:.3e} |", f.h0_hat, f.h1_hat, f.r_squared, f.max_violation);
        };
        row("OLS (full trace)", &self.ols);
        row("envelope", &self.envelope);
        if let Some(w) = &self.window {
            row("OLS (upper half of loss range)", w);
        }
        if !self.comparisons.is_empty() {
            out += "\nMixed-batch secants at smaller batches (noise-dominated: consecutive batches differ):\n\n| batch | slope | R² |\n|---|---|---|\n";
            for c in &self.comparisons {
                let _ = writeln!(out, "| {} | {:.4} | {:.3} |", c.batch_size, c.slope, c.r_squared);
            }
        }
        out
    }
}

fn sgd_trace(setup: &SmoothnessVsLossSetup, batch: usize) -> Result<(Trajectory, Vec<SmoothnessSample>)> {
    let spec = ProblemSpec {
        name: "two_layer_mse".into(),
        params: toml::toml! {
            d = (setup.d as i64)
            hidden = (setup.hidden as i64)
            m = (setup.m as i64)
            lambda1 = 0.0
            lambda2 = 0.0
            init_scale = (setup.init_scale)
        },
    };
    let built = build_problem(&spec, setup.seed)?;
    let traj = run_sgd(
        built.obj.as_ref(),
        &built.w0,
        &StepPolicy::Constant { eta: setup.eta },
        batch,
        setup.seed,
        &StopRule::iters(setup.steps),
    )?;
    let trace = local_smoothness_trace(built.obj.as_ref(), &traj, SecantMode::Stochastic)?;
    Ok((traj, trace.samples))
}

pub fn smoothness_vs_loss(setup: &SmoothnessVsLossSetup) -> Result<SmoothnessVsLoss> {
    let (traj, samples) = sgd_trace(setup, setup.batch_size)?;
    let ols = fit_h0h1(&samples, FitMode::Ols, 1.0)?;
    let envelope = fit_h0h1(&samples, FitMode::Envelope, 1.0)?;
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.loss_gap), b.max(s.loss_gap)));
    let window = fit_h0h1(&crate::smoothness::filter_window(&samples, 0.5 * (lo + hi), hi), FitMode::Ols, 1.0).ok();
    let mut comparisons = Vec::new();
    for &b in &setup.compare_batches {
        let (_, s) = sgd_trace(setup, b)?;
        let f = fit_h0h1(&s, FitMode::Ols, 1.0)?;
        comparisons.push(BatchFit { batch_size: b, slope: f.raw_slope, r_squared: f.r_squared });
    }
    Ok(SmoothnessVsLoss {
        setup: setup.clone(),
        initial_loss: traj.records[0].f,
        final_loss: traj.last().f,
        samples,
        ols,
        envelope,
        window,
        comparisons,
    })
}

// ------------------------------------------------------ practical warm-up

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyOutcome {
    pub label: String,
    pub final_loss: f64,
    pub max_loss: f64,
    pub stop: StopReason,
    /// First iteration at which the clipped step reaches 90% of the base schedule.
    pub warmup_iters: Option<usize>,
    pub steps: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PracticalWarmup {
    pub peak: f64,
    pub total: usize,
    pub outcomes: Vec<PolicyOutcome>,
}

impl PracticalWarmup {
    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "# practical-warmup\n\nTwo-layer tanh MSE + L2, full-batch GD, WSD base schedule (peak {}, no warm-up, {} steps).\n\
             The clipped rule divides the base step by max(1, loss/C).\n\n\
             | policy | final loss | max loss | warm-up length | stop |\n|---|---|---|---|---|\n",
            self.peak, self.total
        );
        for o in &self.outcomes {
            let wu = o.warmup_iters.map_or("–".into(), |k| k.to_string());
            let _ = writeln!(s, "| {} | {:.4e} | {:.4e} | {} | {:?} |", o.label, o.final_loss, o.max_loss, wu, o.stop);
        }
        s
    }

    pub fn steps_csv(&self) -> String {
        let mut s = String::from("policy,iter,effective_step\n");
        for o in &self.outcomes {
            for (k, eta) in o.steps.iter().enumerate() {
                let _ = writeln!(s, "{},{k},{eta}", o.label);
            }
        }
        s
    }
}

pub fn practical_warmup() -> Result<PracticalWarmup> {
    let spec = ProblemSpec {
        name: "two_layer_mse".into(),
        params: toml::toml! { d = 4 hidden = 16 m = 64 lambda1 = 0.01 lambda2 = 0.01 init_scale = 2.0 },
    };
    let built = build_problem(&spec, 0)?;
    let total = 3000;
    let peak = 0.02;
    let base = StepPolicy::wsd_default(peak, total / 5, total);
    let mut policies = vec![("wsd, no warm-up".to_string(), base.clone())];
    for c in [3.5, 4.0, 4.5] {
        policies.push((format!("clipped wsd, C = {c}"), StepPolicy::PracticalClipped { base: Box::new(base.clone()), c }));
    }
    if let Some(cert) = &built.cert {
        policies.push(("theoretical (H0,H1)".into(), StepPolicy::adaptive(cert.h0, cert.h1, cert.f_star)));
    }
    let mut outcomes = Vec::new();
    for (label, policy) in policies {
        let t = run_gd(built.obj.as_ref(), &built.w0, &policy, &StopRule::iters(total))?;
        let steps: Vec<f64> = t.records.iter().map(|r| r.step_size).collect();
        let warmup_iters = match &policy {
            StepPolicy::PracticalClipped { base, .. } => t.records.iter().position(|r| {
                step_size(base, &StepState::new(r.iter, r.f)).is_ok_and(|b| r.step_size >= 0.9 * b)
            }),
            _ => None,
        };
        outcomes.push(PolicyOutcome {
            label,
            final_loss: t.last().f,
            max_loss: t.records.iter().map(|r| r.f).fold(f64::NEG_INFINITY, f64::max),
            stop: t.stop_reason,
            warmup_iters,
            steps,
        });
    }
    Ok(PracticalWarmup { peak, total, outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_experiment_lists_available() {
        let dir = tempfile::tempdir().unwrap();
        let e = cli_experiment("nope", dir.path()).unwrap_err().to_string();
        assert!(e.contains("warmup-vs-constant"));
    }

    #[test]
    fn lower_bound_demo_orders() {
        let d = lower_bound_demo().unwrap();
        assert!(d.runway.measured.unwrap() as f64 >= d.runway.predicted);
        assert_eq!(d.threshold.above_stop, StopReason::Diverged);
        assert_eq!(d.threshold.below_stop, StopReason::MaxIters);
    }

    #[test]
    fn closure_demo_passes() {
        let c = closure_demo(100).unwrap();
        assert!(c.sum.passed() && c.affine_quadratic.passed() && c.affine_exp.passed());
        assert!(c.ratios_increasing());
    }
}
