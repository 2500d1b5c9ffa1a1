//! Containment of (L0,L1)-smoothness and closure under sums, affine maps
//! and the ρ → 1 reduction.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{LabError, Result};
use crate::problems::SmoothnessCertificate;

static NU: OnceLock<f64> = OnceLock::new();

/// Root of ν = e^{−ν}, by damped fixed-point iteration to 1e-14.
pub fn nu() -> f64 {
    *NU.get_or_init(|| {
        let mut x = 0.5_f64;
        for _ in 0..10_000 {
            let next = 0.5 * (x + (-x).exp());
            if (next - x).abs() < 1e-14 {
                return next;
            }
            x = next;
        }
        x
    })
}

/// (L0,L1)-smooth and bounded below ⇒ (H0,H1)-smooth.
pub fn l0l1_to_h0h1(l0: f64, l1: f64) -> Result<(f64, f64)> {
    if !(l0 >= 0.0 && l1 >= 0.0) || !l0.is_finite() || !l1.is_finite() {
        return Err(LabError::Precondition(format!("need finite L0, L1 ≥ 0, got ({l0}, {l1})")));
    }
    let v = nu();
    Ok((l0 + l0 * l1 / v, (4.0 * l1 * l1 + v * l1) / (2.0 * v)))
}

fn require_rho_one(c: &SmoothnessCertificate) -> Result<()> {
    c.validate()?;
    if c.rho != 1.0 {
        return Err(LabError::Precondition("transform needs ρ = 1 certificates".into()));
    }
    Ok(())
}

/// Certificate for f + g with minimum value `h_star`.
pub fn sum_params(cf: &SmoothnessCertificate, cg: &SmoothnessCertificate, h_star: f64) -> Result<SmoothnessCertificate> {
    require_rho_one(cf)?;
    require_rho_one(cg)?;
    let floor = cf.f_star + cg.f_star;
    if h_star < floor - 1e-12 * floor.abs().max(1.0) {
        return Err(LabError::Inconsistent(format!("h* = {h_star} below f* + g* = {floor}")));
    }
    let h1 = cf.h1.max(cg.h1);
    let h0 = cf.h0 + cg.h0 + h1 * h_star - cf.h1 * cf.f_star - cg.h1 * cg.f_star;
    debug_assert!(h0 >= -1e-9 * (cf.h0 + cg.h0).max(1.0));
    let mut out = SmoothnessCertificate::new(h0.max(0.0), h1, h_star, format!("({}) ∩ ({})", cf.region, cg.region));
    out.conservative = cf.conservative || cg.conservative;
    Ok(out)
}

/// Certificate for f(w) = g(Aw + b) with minimum value `f_star`.
pub fn affine_params(cg: &SmoothnessCertificate, a: &DMatrix<f64>, f_star: f64) -> Result<SmoothnessCertificate> {
    require_rho_one(cg)?;
    if f_star < cg.f_star - 1e-12 * cg.f_star.abs().max(1.0) {
        return Err(LabError::Inconsistent(format!("f* = {f_star} below g* = {}", cg.f_star)));
    }
    let a2 = spectral_norm(a).powi(2);
    let mut out = SmoothnessCertificate::new(
        a2 * (cg.h0 + cg.h1 * (f_star - cg.f_star).max(0.0)),
        a2 * cg.h1,
        f_star,
        format!("preimage of ({})", cg.region),
    );
    out.conservative = cg.conservative;
    Ok(out)
}

pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// ρ > 1 bound on the sublevel set {f ≤ f(w0)} as a ρ = 1 bound.
pub fn rho_reduction(k0: f64, k_rho: f64, rho: f64, delta0: f64) -> Result<(f64, f64)> {
    if !(rho >= 1.0) || !(delta0 > 0.0) {
        return Err(LabError::Precondition(format!("need ρ ≥ 1 and Δ0 > 0, got ρ={rho}, Δ0={delta0}")));
    }
    Ok((k0, k_rho * delta0.powf(rho - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu_in_interval() {
        let v = nu();
        assert!(v > 0.56 && v < 0.57);
        assert!((v - (-v).exp()).abs() < 1e-13);
    }

    #[test]
    fn l0l1_examples() {
        assert_eq!(l0l1_to_h0h1(2.0, 0.0).unwrap(), (2.0, 0.0));
        let v = nu();
        let (h0, h1) = l0l1_to_h0h1(1.0, 1.0).unwrap();
        assert!((h0 - (1.0 + 1.0 / v)).abs() < 1e-14);
        assert!((h1 - (4.0 + v) / (2.0 * v)).abs() < 1e-14);
    }

    #[test]
    fn sum_examples() {
        let f = SmoothnessCertificate::new(1.0, 2.0, 0.0, "a");
        let g = SmoothnessCertificate::new(3.0, 1.0, 0.0, "b");
        let s = sum_params(&f, &g, 0.0).unwrap();
        assert_eq!((s.h0, s.h1), (4.0, 2.0));
        let s = sum_params(&f, &f, 0.0).unwrap();
        assert_eq!((s.h0, s.h1), (2.0, 2.0));
        let f1 = SmoothnessCertificate::new(1.0, 2.0, 1.0, "a");
        assert!(matches!(sum_params(&f1, &g, 0.5), Err(LabError::Inconsistent(_))));
    }

    #[test]
    fn affine_examples() {
        let g = SmoothnessCertificate::new(1.5, 0.5, 0.2, "all");
        let same = affine_params(&g, &DMatrix::identity(3, 3), 0.2).unwrap();
        assert!((same.h0 - 1.5).abs() < 1e-12 && (same.h1 - 0.5).abs() < 1e-12);
        let x2 = affine_params(&g, &(DMatrix::identity(3, 3) * 2.0), 0.2).unwrap();
        assert!((x2.h0 - 6.0).abs() < 1e-12 && (x2.h1 - 2.0).abs() < 1e-12);
        assert!(affine_params(&g, &DMatrix::identity(3, 3), 0.1).is_err());
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_reduction(1.0, 2.0, 1.0, 5.0).unwrap(), (1.0, 2.0));
        assert_eq!(rho_reduction(1.0, 2.0, 2.0, 3.0).unwrap(), (1.0, 6.0));
    }
}
