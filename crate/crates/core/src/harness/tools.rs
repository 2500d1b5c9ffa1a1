//! Problem-file commands: constants, certificate verification, lemma checks.

use std::fs;
use std::path::Path;

use super::config::ProblemFile;
use super::registry::{build_problem, BuiltProblem};
use crate::error::{LabError, Result};
use crate::optimize::{run_gd, StopRule};
use crate::problems::SmoothnessCertificate;
use crate::schedules::StepPolicy;
use crate::smoothness::{default_cert_tol, draw_points, verify_certificate, CertificateReport};
use crate::theory::{check_descent_along, check_gradient_bound, LemmaReport};

pub fn load_problem(path: &Path) -> Result<(ProblemFile, BuiltProblem)> {
    let text = fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    let file = ProblemFile::parse(&text).map_err(|e| e.in_file(path))?;
    let built = build_problem(&file.problem, file.seed)?;
    Ok((file, built))
}

fn require_cert(file: &ProblemFile, built: &BuiltProblem) -> Result<SmoothnessCertificate> {
    built.cert.clone().ok_or_else(|| {
        LabError::Config(format!("problem '{}' has no closed-form certificate; pass one with --cert", file.problem.name))
    })
}

/// `H0,H1[,f_star[,rho]]`.
pub fn parse_cert_arg(s: &str) -> Result<SmoothnessCertificate> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| LabError::Input(format!("--cert: '{p}' is not a number"))))
        .collect::<Result<_>>()?;
    let cert = match parts[..] {
        [h0, h1] => SmoothnessCertificate::new(h0, h1, 0.0, "user supplied"),
        [h0, h1, fs] => SmoothnessCertificate::new(h0, h1, fs, "user supplied"),
        [h0, h1, fs, rho] => SmoothnessCertificate::new(h0, h1, fs, "user supplied").with_rho(rho),
        _ => return Err(LabError::Input("--cert expects H0,H1[,f_star[,rho]]".into())),
    };
    cert.validate()?;
    Ok(cert)
}

pub fn cli_constants(path: &Path) -> Result<SmoothnessCertificate> {
    let (file, built) = load_problem(path)?;
    require_cert(&file, &built)
}

pub fn cli_verify(
    path: &Path,
    cert: Option<SmoothnessCertificate>,
    n_points: usize,
    tol: Option<f64>,
) -> Result<CertificateReport> {
    let (file, built) = load_problem(path)?;
    let cert = match cert {
        Some(c) => c,
        None => require_cert(&file, &built)?,
    };
    let tol = tol.unwrap_or_else(|| default_cert_tol(&cert));
    verify_certificate(built.obj.as_ref(), &cert, built.sampler.as_ref(), n_points, tol)
}

/// Gradient bound on region samples, then the descent inequality along an
/// adaptive run of `steps` iterations started at the problem's w0.
pub fn cli_lemmas(path: &Path, n_points: usize, steps: usize) -> Result<Vec<LemmaReport>> {
    let (file, built) = load_problem(path)?;
    let cert = require_cert(&file, &built)?;
    let obj = built.obj.as_ref();
    let points = draw_points(built.sampler.as_ref(), n_points)?;
    let grad = check_gradient_bound(obj, &cert, &points)?;
    let traj = run_gd(obj, &built.w0, &StepPolicy::adaptive(cert.h0, cert.h1, cert.f_star), &StopRule::iters(steps))?;
    let descent = check_descent_along(obj, &cert, &traj)?;
    Ok(vec![grad, descent])
}
