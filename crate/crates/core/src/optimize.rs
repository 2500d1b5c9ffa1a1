//! Gradient descent and mini-batch SGD drivers with fully recorded trajectories.

use std::io::Write;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::core::{norm, EvalRecord, Objective};
use crate::error::{LabError, Result};
use crate::rng::seeded;
use crate::schedules::{step_size, StepPolicy, StepState};

pub const DEFAULT_DIVERGENCE_GUARD: f64 = 1e12;
/// Above this dimension only every 10th iterate (plus first/last) is kept.
pub const SNAPSHOT_FULL_DIM: usize = 100;
pub const SNAPSHOT_STRIDE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIters,
    GradTol,
    LossTol,
    Diverged,
    StepError,
}

fn default_guard() -> f64 {
    DEFAULT_DIVERGENCE_GUARD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_tol: Option<f64>,
    #[serde(default = "default_guard")]
    pub divergence_guard: f64,
}

impl StopRule {
    pub fn iters(max_iters: usize) -> Self {
        StopRule { max_iters, grad_tol: None, loss_tol: None, divergence_guard: DEFAULT_DIVERGENCE_GUARD }
    }

    pub fn with_grad_tol(mut self, tol: f64) -> Self {
        self.grad_tol = Some(tol);
        self
    }

    pub fn with_loss_tol(mut self, tol: f64) -> Self {
        self.loss_tol = Some(tol);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(LabError::Precondition("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<EvalRecord>,
    /// Thinned (iter, w_iter) pairs.
    pub snapshots: Vec<(usize, Vec<f64>)>,
    /// SGD only: indices of the mini-batch used at each iterate.
    pub batches: Vec<Vec<usize>>,
    /// SGD only: mini-batch loss at each iterate.
    pub batch_losses: Vec<f64>,
    pub policy_id: String,
    pub problem_id: String,
    pub seed: Option<u64>,
    pub stop_reason: StopReason,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub stop_reason: StopReason,
    pub iters: usize,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub final_dist_to_solution: Option<f64>,
    pub problem_id: String,
    pub policy_id: String,
    pub seed: Option<u64>,
    pub error: Option<String>,
}

pub const TRAJECTORY_COLUMNS: [&str; 5] = ["iter", "f", "grad_norm", "step_size", "dist_to_solution"];

impl Trajectory {
    /// Number of update steps performed.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> &EvalRecord {
        self.records.last().expect("trajectory has at least one record")
    }

    pub fn snapshot(&self, iter: usize) -> Option<&[f64]> {
        self.snapshots
            .binary_search_by_key(&iter, |(k, _)| *k)
            .ok()
            .map(|i| self.snapshots[i].1.as_slice())
    }

    /// First iterate satisfying `pred`, if any.
    pub fn first_iter_where(&self, pred: impl Fn(&EvalRecord) -> bool) -> Option<usize> {
        self.records.iter().find(|r| pred(r)).map(|r| r.iter)
    }

    pub fn summary(&self) -> TrajectorySummary {
        let last = self.last();
        TrajectorySummary {
            stop_reason: self.stop_reason,
            iters: self.iterations(),
            final_f: last.f,
            final_grad_norm: last.grad_norm,
            final_dist_to_solution: last.dist_to_solution,
            problem_id: self.problem_id.clone(),
            policy_id: self.policy_id.clone(),
            seed: self.seed,
            error: self.error.clone(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(TRAJECTORY_COLUMNS)?;
        for r in &self.records {
            wtr.write_record([
                r.iter.to_string(),
                r.f.to_string(),
                r.grad_norm.to_string(),
                r.step_size.to_string(),
                r.dist_to_solution.map(|d| d.to_string()).unwrap_or_default(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf8")
    }
}

struct Recorder {
    traj: Trajectory,
    keep_all: bool,
}

impl Recorder {
    fn new(obj: &dyn Objective, policy: &StepPolicy, seed: Option<u64>) -> Self {
        Recorder {
            traj: Trajectory {
                records: Vec::new(),
                snapshots: Vec::new(),
                batches: Vec::new(),
                batch_losses: Vec::new(),
                policy_id: policy.id(),
                problem_id: obj.name(),
                seed,
                stop_reason: StopReason::MaxIters,
                error: None,
            },
            keep_all: obj.dim() <= SNAPSHOT_FULL_DIM,
        }
    }

    fn push(&mut self, iter: usize, w: &[f64], f: f64, grad_norm: f64, step: f64, terminal: bool) {
        self.traj.records.push(EvalRecord { iter, f, grad_norm, step_size: step, dist_to_solution: None });
        if self.keep_all || iter % SNAPSHOT_STRIDE == 0 || terminal {
            self.traj.snapshots.push((iter, w.to_vec()));
        }
    }

    fn finish(mut self, reason: StopReason, error: Option<String>) -> Trajectory {
        self.traj.stop_reason = reason;
        self.traj.error = error;
        self.traj
    }
}

fn check_stop(
    stop: &StopRule,
    f_star: Option<f64>,
    k: usize,
    f: f64,
    gn: f64,
    w: &[f64],
) -> Option<StopReason> {
    let wn = norm(w);
    if !f.is_finite() || !gn.is_finite() || f.abs() > stop.divergence_guard || wn > stop.divergence_guard {
        return Some(StopReason::Diverged);
    }
    if stop.grad_tol.is_some_and(|t| gn <= t) {
        return Some(StopReason::GradTol);
    }
    if stop.loss_tol.is_some_and(|t| f - f_star.unwrap_or(0.0) <= t) {
        return Some(StopReason::LossTol);
    }
    if k >= stop.max_iters {
        return Some(StopReason::MaxIters);
    }
    None
}

/// Step the policy would take at a terminal iterate (0 when it cannot).
fn terminal_step(policy: &StepPolicy, state: &StepState) -> f64 {
    step_size(policy, state).ok().filter(|s| s.is_finite()).unwrap_or(0.0)
}

/// w_{k+1} = w_k − η_k ∇f(w_k).
pub fn run_gd(obj: &dyn Objective, w0: &[f64], policy: &StepPolicy, stop: &StopRule) -> Result<Trajectory> {
    if w0.len() != obj.dim() {
        return Err(LabError::Input(format!("w0 has length {} but dim is {}", w0.len(), obj.dim())));
    }
    stop.validate()?;
    let mut rec = Recorder::new(obj, policy, None);
    let mut w = w0.to_vec();
    let mut k = 0;
    loop {
        let (f, g) = obj.value_grad(&w);
        let gn = norm(&g);
        let state = StepState::new(k, f);
        if let Some(reason) = check_stop(stop, obj.f_star(), k, f, gn, &w) {
            let step = if reason == StopReason::Diverged { 0.0 } else { terminal_step(policy, &state) };
            rec.push(k, &w, f, gn, step, true);
            return Ok(rec.finish(reason, None));
        }
        let eta = match step_size(policy, &state) {
            Ok(e) => e,
            Err(e) => {
                rec.push(k, &w, f, gn, 0.0, true);
                return Ok(rec.finish(StopReason::StepError, Some(e.to_string())));
            }
        };
        rec.push(k, &w, f, gn, eta, false);
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi -= eta * gi;
        }
        k += 1;
    }
}

/// w_{k+1} = w_k − η_k ∇f_{S_k}(w_k) with S_k drawn uniformly without
/// replacement; the policy sees the mini-batch loss.
pub fn run_sgd(
    obj: &dyn Objective,
    w0: &[f64],
    policy: &StepPolicy,
    batch_size: usize,
    seed: u64,
    stop: &StopRule,
) -> Result<Trajectory> {
    let n = obj.n_components().ok_or(LabError::Capability("SGD needs a finite-sum objective"))?;
    if batch_size == 0 || batch_size > n {
        return Err(LabError::Precondition(format!("batch size {batch_size} outside 1..={n}")));
    }
    if w0.len() != obj.dim() {
        return Err(LabError::Input(format!("w0 has length {} but dim is {}", w0.len(), obj.dim())));
    }
    stop.validate()?;
    let full_batch = batch_size == n;
    let mut rng = seeded(seed);
    let mut rec = Recorder::new(obj, policy, Some(seed));
    let mut w = w0.to_vec();
    let mut k = 0;
    loop {
        let (f, g_full) = obj.value_grad(&w);
        let gn = norm(&g_full);
        let (idx, fb, gb, batch_f_star) = if full_batch {
            ((0..n).collect(), f, g_full, None)
        } else {
            let idx = sample(&mut rng, n, batch_size).into_vec();
            let (fb, gb) = obj.batch_value_grad(&idx, &w);
            let stars: Option<Vec<f64>> = idx.iter().map(|&i| obj.component_f_star(i)).collect();
            let bfs = stars.map(|s| s.iter().sum::<f64>() / s.len() as f64);
            (idx, fb, gb, bfs)
        };
        let state = StepState { iter: k, current_loss: fb, batch_f_star };
        if let Some(reason) = check_stop(stop, obj.f_star(), k, f, gn, &w) {
            let step = if reason == StopReason::Diverged { 0.0 } else { terminal_step(policy, &state) };
            rec.push(k, &w, f, gn, step, true);
            rec.traj.batches.push(idx);
            rec.traj.batch_losses.push(fb);
            return Ok(rec.finish(reason, None));
        }
        let eta = match step_size(policy, &state) {
            Ok(e) => e,
            Err(e) => {
                rec.push(k, &w, f, gn, 0.0, true);
                return Ok(rec.finish(StopReason::StepError, Some(e.to_string())));
            }
        };
        rec.push(k, &w, f, gn, eta, false);
        rec.traj.batches.push(idx);
        rec.traj.batch_losses.push(fb);
        for (wi, gi) in w.iter_mut().zip(&gb) {
            *wi -= eta * gi;
        }
        k += 1;
    }
}

/// Fills `dist_to_solution` on every record that has a snapshot.
pub fn attach_distance_tracking(mut traj: Trajectory, obj: &dyn Objective) -> Result<Trajectory> {
    for (iter, w) in &traj.snapshots {
        let p = obj
            .project_solution(w)
            .ok_or(LabError::Capability("distance tracking needs a solution-set projector"))?;
        let d: Vec<f64> = w.iter().zip(&p).map(|(a, b)| a - b).collect();
        traj.records[*iter].dist_to_solution = Some(norm(&d));
    }
    Ok(traj)
}
