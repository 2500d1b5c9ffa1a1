//! Numerical checks of the descent lemmas and of the structural
//! conditions (aiming, PL, interpolation) the convergence theorems assume.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{norm, Objective};
use crate::error::{LabError, Result};
use crate::optimize::Trajectory;
use crate::problems::SmoothnessCertificate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Violated,
    /// Outside the lemma's hypotheses; reported, never skipped.
    OutOfScope,
    /// Exempt by the theorem's scope (e.g. small-gap steps).
    Exempt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    fn new(lemma: &str, checks: Vec<LemmaCheck>) -> Self {
        LemmaReport { lemma: lemma.into(), checks }
    }

    fn count(&self, s: Status) -> usize {
        self.checks.iter().filter(|c| c.status == s).count()
    }

    pub fn violations(&self) -> Vec<&LemmaCheck> {
        self.checks.iter().filter(|c| c.status == Status::Violated).collect()
    }

    pub fn n_violations(&self) -> usize {
        self.count(Status::Violated)
    }

    pub fn n_checked(&self) -> usize {
        self.count(Status::Ok) + self.count(Status::Violated)
    }

    pub fn n_out_of_scope(&self) -> usize {
        self.count(Status::OutOfScope)
    }

    pub fn passed(&self) -> bool {
        self.n_violations() == 0
    }

    /// Smallest rhs − lhs over checked entries (negative when violated).
    pub fn worst_margin(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| matches!(c.status, Status::Ok | Status::Violated))
            .map(|c| c.rhs - c.lhs)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_reports_csv(std::slice::from_ref(self), out)
    }
}

/// Several reports as one CSV (lemma, index, lhs, rhs, status).
pub fn write_reports_csv<W: Write>(reports: &[LemmaReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lemma", "index", "lhs", "rhs", "status"])?;
    for r in reports {
        for c in &r.checks {
            let status = match c.status {
                Status::Ok => "ok",
                Status::Violated => "violated",
                Status::OutOfScope => "out_of_scope",
                Status::Exempt => "exempt",
            };
            w.write_record([r.lemma.clone(), c.index.to_string(), c.lhs.to_string(), c.rhs.to_string(), status.into()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn judge(index: usize, lhs: f64, rhs: f64, tol: f64) -> LemmaCheck {
    let status = if lhs <= rhs + tol { Status::Ok } else { Status::Violated };
    LemmaCheck { index, lhs, rhs, status }
}

fn require_rho_one(cert: &SmoothnessCertificate) -> Result<()> {
    cert.validate()?;
    if cert.rho != 1.0 {
        return Err(LabError::Precondition("lemma checks need a ρ = 1 certificate".into()));
    }
    Ok(())
}

/// ‖∇f(w)‖² ≤ (9/4)(H0 + 3H1·gap)·gap.
pub fn check_gradient_bound(obj: &dyn Objective, cert: &SmoothnessCertificate, points: &[Vec<f64>]) -> Result<LemmaReport> {
    require_rho_one(cert)?;
    let checks = points
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let (f, g) = obj.value_grad(w);
            let gap = f - cert.f_star;
            let lhs = norm(&g).powi(2);
            if gap < -1e-12 * cert.f_star.abs().max(1.0) {
                return LemmaCheck { index: i, lhs, rhs: f64::NAN, status: Status::OutOfScope };
            }
            let gap = gap.max(0.0);
            let rhs = 2.25 * (cert.h0 + 3.0 * cert.h1 * gap) * gap;
            judge(i, lhs, rhs, 1e-9 * rhs + 1e-15)
        })
        .collect();
    Ok(LemmaReport::new("gradient_bound", checks))
}

/// f(w − η∇f) ≤ f − η‖∇f‖² + (H0 + H1·gap)η²‖∇f‖², valid when η‖∇f‖ ≤ 1/√H1.
pub fn check_descent_step(obj: &dyn Objective, cert: &SmoothnessCertificate, w: &[f64], eta: f64) -> Result<LemmaReport> {
    require_rho_one(cert)?;
    Ok(LemmaReport::new("descent_step", vec![descent_check(obj, cert, 0, w, eta)]))
}

fn descent_check(obj: &dyn Objective, cert: &SmoothnessCertificate, index: usize, w: &[f64], eta: f64) -> LemmaCheck {
    let (f, g) = obj.value_grad(w);
    let g2 = norm(&g).powi(2);
    let y: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a - eta * b).collect();
    let lhs = obj.value(&y);
    let gap = (f - cert.f_star).max(0.0);
    let rhs = f - eta * g2 + (cert.h0 + cert.h1 * gap) * eta * eta * g2;
    let in_scope = cert.h1 == 0.0 || eta * g2.sqrt() <= 1.0 / cert.h1.sqrt();
    if !in_scope {
        return LemmaCheck { index, lhs, rhs, status: Status::OutOfScope };
    }
    judge(index, lhs, rhs, 1e-10 * (1.0 + f.abs()))
}

/// Descent-step check at every consecutive pair of stored iterates, using
/// the step actually taken.
pub fn check_descent_along(obj: &dyn Objective, cert: &SmoothnessCertificate, traj: &Trajectory) -> Result<LemmaReport> {
    require_rho_one(cert)?;
    let pairs: Vec<(usize, &Vec<f64>)> = traj
        .snapshots
        .windows(2)
        .filter(|p| p[1].0 == p[0].0 + 1)
        .map(|p| (p[0].0, &p[0].1))
        .collect();
    let checks = pairs
        .par_iter()
        .map(|(k, w)| descent_check(obj, cert, *k, w, traj.records[*k].step_size))
        .collect();
    Ok(LemmaReport::new("descent_step", checks))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionKind {
    /// ⟨∇f(w), w − π(w)⟩ ≥ θ(f(w) − f*)
    Aiming { theta: f64 },
    /// ‖∇f(w)‖² ≥ 2μ(f(w) − f*)
    Pl { mu: f64 },
    /// every component is minimized at the projected solution
    Interpolation,
}

pub fn check_condition(kind: ConditionKind, obj: &dyn Objective, points: &[Vec<f64>]) -> Result<LemmaReport> {
    let f_star = obj.f_star().ok_or(LabError::Capability("condition checks need a known f*"))?;
    match kind {
        ConditionKind::Aiming { theta } => {
            if obj.project_solution(&vec![0.0; obj.dim()]).is_none() {
                return Err(LabError::Capability("aiming check needs a solution projector"));
            }
            let checks = points
                .par_iter()
                .enumerate()
                .map(|(i, w)| {
                    let (f, g) = obj.value_grad(w);
                    let p = obj.project_solution(w).expect("projector available");
                    let lhs: f64 = g.iter().zip(w.iter().zip(&p)).map(|(gi, (wi, pi))| gi * (wi - pi)).sum();
                    let rhs = theta * (f - f_star);
                    // inequality is lhs ≥ rhs: flip into the common ≤ form
                    judge(i, rhs, lhs, 1e-9 * (1.0 + rhs.abs()))
                })
                .collect();
            Ok(LemmaReport::new("aiming", checks))
        }
        ConditionKind::Pl { mu } => {
            let checks = points
                .par_iter()
                .enumerate()
                .map(|(i, w)| {
                    let (f, g) = obj.value_grad(w);
                    let lhs = norm(&g).powi(2);
                    let rhs = 2.0 * mu * (f - f_star);
                    judge(i, rhs, lhs, 1e-9 * (1.0 + rhs.abs()))
                })
                .collect();
            Ok(LemmaReport::new("pl", checks))
        }
        ConditionKind::Interpolation => {
            let n = obj.n_components().ok_or(LabError::Capability("interpolation check needs components"))?;
            let mut checks = Vec::new();
            for (pi, w) in points.iter().enumerate() {
                let sol = obj
                    .project_solution(w)
                    .ok_or(LabError::Capability("interpolation check needs a solution projector"))?;
                for i in 0..n {
                    let fi_star = obj.component_f_star(i).ok_or(LabError::Capability("component minima unknown"))?;
                    let v = obj.component_value(i, &sol);
                    checks.push(judge(pi * n + i, v, fi_star, 1e-9 * (1.0 + fi_star.abs())));
                }
            }
            Ok(LemmaReport::new("interpolation", checks))
        }
    }
}

/// While gap_k ≥ H0/(2H1): gap_{k+1} ≤ (1 − θ³/(80·H1·dist0²))·gap_k.
pub fn check_linear_decrease(
    obj: &dyn Objective,
    cert: &SmoothnessCertificate,
    theta: f64,
    dist0: f64,
    traj: &Trajectory,
) -> Result<LemmaReport> {
    require_rho_one(cert)?;
    if !(theta > 0.0 && theta <= 1.0) || !(dist0 > 0.0) {
        return Err(LabError::Precondition(format!("need θ ∈ (0,1] and dist0 > 0, got θ={theta}, dist0={dist0}")));
    }
    let _ = obj;
    let threshold = if cert.h1 > 0.0 { cert.h0 / (2.0 * cert.h1) } else { f64::INFINITY };
    let factor = if cert.h1 > 0.0 { 1.0 - theta.powi(3) / (80.0 * cert.h1 * dist0 * dist0) } else { 1.0 };
    let checks = traj
        .records
        .windows(2)
        .map(|r| {
            let gap = r[0].f - cert.f_star;
            let next = r[1].f - cert.f_star;
            let rhs = factor * gap;
            if gap < threshold {
                LemmaCheck { index: r[0].iter, lhs: next, rhs, status: Status::Exempt }
            } else {
                judge(r[0].iter, next, rhs, 1e-12 * (1.0 + gap.abs()))
            }
        })
        .collect();
    Ok(LemmaReport::new("linear_decrease", checks))
}
