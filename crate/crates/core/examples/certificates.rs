//! Closed-form (H0,H1) certificates for the problem zoo, each checked
//! numerically against Hessian spectral norms on its own region.
//!
//!     cargo run --release --example certificates

use warmup_lab::harness::{build_problem, ProblemSpec};
use warmup_lab::smoothness::{default_cert_tol, verify_certificate};

fn main() -> warmup_lab::Result<()> {
    let problems = [
        ("exp_quadratic", ""),
        ("runway", ""),
        ("pl_lower_bound", ""),
        ("least_squares", ""),
        ("deep_linear", "dims = [2, 3, 4]"),
        ("semi_linear", "dims = [2, 2, 2, 4]"),
        ("deep_leaky", "dims = [2, 2, 2, 4]"),
        ("two_layer_mse", "hidden = 8"),
        ("two_layer_ce", "hidden = 8"),
    ];
    println!("{:<16} {:>11} {:>11} {:>4} {:>6} {:>10}  region", "problem", "H0", "H1", "rho", "viol", "max ratio");
    for (name, params) in problems {
        let spec = ProblemSpec { name: name.into(), params: toml::from_str(params).unwrap() };
        let built = build_problem(&spec, 0)?;
        let cert = built.cert.clone().expect("every problem here is certified");
        let report = verify_certificate(built.obj.as_ref(), &cert, built.sampler.as_ref(), 200, default_cert_tol(&cert))?;
        println!(
            "{:<16} {:>11.4e} {:>11.4e} {:>4} {:>6} {:>10.4}  {}{}",
            name,
            cert.h0,
            cert.h1,
            cert.rho,
            report.violations.len(),
            report.max_ratio,
            cert.region,
            if cert.conservative { " (baseline 0, conservative)" } else { "" }
        );
    }
    Ok(())
}
