//! Every closed-form constant evaluated a second time from an independent
//! transcription, written in a different algebraic arrangement (merged
//! powers, expanded products), and required to agree to 1e-12 relative.

use std::f64::consts::E;

use nalgebra::DMatrix;
use proptest::prelude::*;

use warmup_lab::problems::{ActivationSpec, DatasetPair, SmoothnessCertificate};
use warmup_lab::theory::{
    affine_params, deep_leaky_constants, deep_linear_constants, l0l1_to_h0h1, nu, predict_bound,
    semi_linear_constants, sum_params, two_layer_ce_constants, two_layer_mse_constants, BoundInputs, BoundKind,
};

const REL: f64 = 1e-12;

fn agree(label: &str, a: f64, b: f64) {
    agree_at(label, a, b, 0.0)
}

/// Relative agreement, measured against `scale` too when the value is the
/// result of a cancellation.
fn agree_at(label: &str, a: f64, b: f64, scale: f64) {
    let scale = a.abs().max(b.abs()).max(scale).max(f64::MIN_POSITIVE);
    assert!((a - b).abs() <= REL * scale, "{label}: {a} vs {b} (rel {:e})", (a - b).abs() / scale);
}

/// Square data with d = c so the layer shapes are easy to vary.
fn data(d: usize, c: usize, m: usize, seed: u64) -> DatasetPair {
    DatasetPair::random(d, c, m, seed).unwrap()
}

// ---- second transcriptions -------------------------------------------------

fn deep_linear_alt(x: f64, y: f64, lam: f64, d: f64, l: f64, f_star: f64) -> (f64, f64) {
    // P^a λ^{-a/2} Y^a = P^a (Y²/λ)^{a/2}
    let p = 2.0 * d.powf((l - 1.0) / 2.0);
    let a = 2.0 * (l - 1.0) / l;
    let b = 1.0 - 2.0 / l;
    let first = p.powf(a) * x.powi(2);
    let second = p.powf(b) * x;
    let r = y * y / lam;
    let h0_bar = 4.0 * l.powi(2) * (first * r.powf(a / 2.0) + second * r.powf(b / 2.0));
    let h1 = 4.0 * l.powi(2) * (first * lam.powf(-a / 2.0) + second * lam.powf(-b / 2.0) * (1.0 + y.powf(b)));
    (2.0 * h0_bar + h1 + h1 * f_star, h1)
}

fn semi_linear_alt(x: f64, y: f64, lam: f64, d: f64, l: f64, b: f64, h: f64) -> (f64, f64) {
    let k = 4.0 * d.powf(l - 2.0) / (h * b.powi(2) * lam);
    let e = (l - 2.0) / (2.0 * (l - 1.0));
    let linear = 2.0 * x * k.powf(e) * (y.powf(2.0 * e) + 1.0);
    let sq = 4.0 * k * x.powi(2);
    (l.powi(2) * (sq * y.powi(2) + linear), l.powi(2) * (sq + linear))
}

fn deep_leaky_alt(x: f64, y: f64, lam: f64, l: f64, slopes: &[f64], floors: &[f64]) -> (f64, f64) {
    let prod_hb2: f64 = slopes.iter().zip(floors).map(|(b, h)| h * b * b).product();
    let big_l = lam * prod_hb2;
    // G = 2Y/√Λ
    let g = 2.0 * y / big_l.sqrt();
    let t1 = 2.0 * l * (l - 1.0) * x * g.powf(l - 2.0);
    let t2 = 4.0 * l * l * x * x * g.powf(2.0 * (l - 1.0));
    let t3 = 2.0 * l * (l - 1.0) * x * (4.0 / big_l).powf((l - 2.0) / 2.0);
    let t4 = 2.0 * l * l * x * x * (4.0 / big_l).powf(l - 1.0);
    (t1 + t2 + t3 + t4, t1 + t3 + t4)
}

fn mse_alt(c1: f64, c2: f64, c3: f64, x: f64, l1: f64, l2: f64) -> (f64, f64) {
    let h0 = 4.0 * c2 * x + 2.0 * l1 + 2.0 * l2;
    let quad = (8.0 * c2 * c2 + 4.0 * c3 + 16.0 * c1 * c2) / l1 + (8.0 * c1 * c1 + 16.0 * c1 * c2) / l2 + 2.0 * c3;
    (h0, quad * x * x + 4.0 * c2 * x)
}

fn ce_alt(c1: f64, c2: f64, c3: f64, x: f64, l1: f64, l2: f64) -> (f64, f64) {
    let quad = (2.0 * c2 * c2 + 2.0 * c3 + 4.0 * c1 * c2) / l1 + (2.0 * c1 * c1 + 4.0 * c1 * c2) / l2 + c3;
    (l1 + l2, quad * x * x + 2.0 * c2 * x)
}

/// ν = W(1), by Newton on x·eˣ − 1.
fn omega() -> f64 {
    let mut x = 0.5_f64;
    for _ in 0..100 {
        let ex = x.exp();
        x -= (x * ex - 1.0) / (ex * (x + 1.0));
    }
    x
}

fn bound_alt(kind: BoundKind, h0: f64, h1: f64, d0: f64, eps: f64, theta: f64, mu: f64, dist: f64) -> f64 {
    let pre = d0 / (1.0 + d0.ln());
    match kind {
        BoundKind::UpperAiming => 20.0 * dist * dist * (h0 + 2.0 * h1 * eps) / (theta * theta * eps),
        BoundKind::UpperPl => {
            if h1 == 0.0 {
                (20.0 * h0 / mu) * (d0 / eps).ln().max(0.0)
            } else {
                (40.0 * h1 * d0 + 20.0 * h0 * (h0 / (2.0 * h1 * eps)).ln().max(0.0)) / mu
            }
        }
        BoundKind::UpperNonconvex => {
            let s = h0 + 2.0 * h1 * d0;
            // 1 + H1Δ0/(2s) = (2s + H1Δ0)/(2s)
            let k = 40.0 * s * s * d0 / (eps * eps * (2.0 * s + h1 * d0));
            if k > 6.0 {
                k
            } else {
                6.0
            }
        }
        BoundKind::LowerNonconvex => (h1 * pre * (d0 / (8.0 * eps * eps) - 0.25)).max(0.0),
        BoundKind::LowerConvex => (h1 * pre * (d0 / eps - 1.0) / 4.0).max(0.0),
        BoundKind::LowerPl => (h1 * pre * (d0.ln() - eps.ln()) / (4.0 * mu)).max(0.0),
    }
}

// ---- fixed anchors ------------------------------------------------------------

#[test]
fn deep_linear_identity_instance() {
    let dp = DatasetPair::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
    assert!((dp.x_norm - 1.0).abs() < 1e-12 && (dp.lambda_min - 1.0).abs() < 1e-12);
    agree("‖Y‖_F", dp.y_frob, 2f64.sqrt());
    let c = deep_linear_constants(&dp, &[2, 2, 2], 0.0).unwrap();
    let (h0, h1) = deep_linear_alt(1.0, 2f64.sqrt(), 1.0, 2.0, 2.0, 0.0);
    agree("H0", c.h0, h0);
    agree("H1", c.h1, h1);
    // ℓ = 2: P = 2√2, a = 1, b = 0 ⇒ H̄0 = 16(2√2·√2 + 1) = 80, H1 = 16(2√2 + 2)
    agree("H1 by hand", c.h1, 16.0 * (2.0 * 2f64.sqrt() + 2.0));
    agree("H0 by hand", c.h0, 160.0 + c.h1);
}

#[test]
fn two_layer_mse_by_hand() {
    let c = two_layer_mse_constants(&ActivationSpec::tanh(), 1.0, 1.0, 1.0).unwrap();
    agree("H0", c.h0, 8.0);
}

#[test]
fn two_layer_ce_h0_is_regularisation() {
    let c = two_layer_ce_constants(&ActivationSpec::tanh(), 3.0, 0.25, 0.5).unwrap();
    assert_eq!(c.h0, 0.75);
}

#[test]
fn nu_two_ways() {
    agree("ν", nu(), omega());
    agree("ν = e^{-ν}", nu(), (-nu()).exp());
    let (h0, h1) = l0l1_to_h0h1(1.0, 1.0).unwrap();
    let v = omega();
    agree("H0", h0, 1.0 + 1.0 / v);
    agree("H1", h1, (4.0 + v) / (2.0 * v));
}

#[test]
fn bound_anchors() {
    let p = predict_bound(
        BoundKind::UpperAiming,
        BoundInputs { h0: Some(1.0), h1: Some(0.0), eps: Some(0.1), theta: Some(1.0), dist0: Some(1.0), ..Default::default() },
    )
    .unwrap();
    agree("upper aiming", p.iters, 200.0);
    let p = predict_bound(
        BoundKind::LowerConvex,
        BoundInputs { h1: Some(1.0), delta0: Some(E), eps: Some(E / 2.0), ..Default::default() },
    )
    .unwrap();
    // (e/2)·((e − e/2)/(4·e/2)) = e/8
    agree("lower convex", p.iters, E / 8.0);
}

// ---- randomized double entry --------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deep_linear_double_entry(l in 2usize..5, d in 1usize..5, seed in 0u64..1000, f_star in 0.0f64..3.0) {
        let dp = data(d, d, 2 * d + 1, seed);
        let dims = vec![d; l + 1];
        let c = deep_linear_constants(&dp, &dims, f_star).unwrap();
        let (h0, h1) = deep_linear_alt(dp.x_norm, dp.y_frob, dp.lambda_min, d as f64, l as f64, f_star);
        agree("H0", c.h0, h0);
        agree("H1", c.h1, h1);
    }

    #[test]
    fn semi_linear_double_entry(
        l in 2usize..5, d in 1usize..5, seed in 0u64..1000, b in 0.05f64..1.0, h in 0.01f64..2.0,
    ) {
        let dp = data(d, d, 2 * d + 1, seed);
        let c = semi_linear_constants(&dp, &vec![d; l + 1], b, h).unwrap();
        let (h0, h1) = semi_linear_alt(dp.x_norm, dp.y_frob, dp.lambda_min, d as f64, l as f64, b, h);
        agree("H0", c.h0, h0);
        agree("H1", c.h1, h1);
    }

    #[test]
    fn deep_leaky_double_entry(
        l in 2usize..5, d in 1usize..5, seed in 0u64..1000,
        slopes in prop::collection::vec(0.05f64..1.0, 4), floors in prop::collection::vec(0.01f64..2.0, 4),
    ) {
        let dp = data(d, d, 2 * d + 1, seed);
        let (s, f) = (&slopes[..l - 1], &floors[..l - 1]);
        let c = deep_leaky_constants(&dp, &vec![d; l + 1], s, f).unwrap();
        let (h0, h1) = deep_leaky_alt(dp.x_norm, dp.y_frob, dp.lambda_min, l as f64, s, f);
        agree("H0", c.h0, h0);
        agree("H1", c.h1, h1);
        prop_assert_eq!(c.rho, (l - 1) as f64);
    }

    #[test]
    fn two_layer_double_entry(x in 0.0f64..20.0, l1 in 1e-3f64..2.0, l2 in 1e-3f64..2.0, leaky in 0.05f64..1.0) {
        for act in [ActivationSpec::tanh(), ActivationSpec::identity()] {
            let c3 = act.c3.unwrap();
            let c = two_layer_mse_constants(&act, x, l1, l2).unwrap();
            let (h0, h1) = mse_alt(act.c1, act.c2, c3, x, l1, l2);
            agree("mse H0", c.h0, h0);
            agree("mse H1", c.h1, h1);
            let c = two_layer_ce_constants(&act, x, l1, l2).unwrap();
            let (h0, h1) = ce_alt(act.c1, act.c2, c3, x, l1, l2);
            agree("ce H0", c.h0, h0);
            agree("ce H1", c.h1, h1);
        }
        // leaky-ReLU has no bounded second derivative
        prop_assert!(two_layer_mse_constants(&ActivationSpec::leaky_relu(leaky).unwrap(), x, l1, l2).is_err());
    }

    #[test]
    fn l0l1_double_entry(l0 in 0.0f64..50.0, l1 in 0.0f64..50.0) {
        let (h0, h1) = l0l1_to_h0h1(l0, l1).unwrap();
        let v = omega();
        agree("H0", h0, l0 * (v + l1) / v);
        agree("H1", h1, l1 * (4.0 * l1 + v) / (2.0 * v));
    }

    #[test]
    fn closure_double_entry(
        f0 in 0.0f64..5.0, f1 in 0.0f64..5.0, fs in 0.0f64..2.0,
        g0 in 0.0f64..5.0, g1 in 0.0f64..5.0, gs in 0.0f64..2.0, extra in 0.0f64..2.0,
        entries in prop::collection::vec(-2.0f64..2.0, 6),
    ) {
        let cf = SmoothnessCertificate::new(f0, f1, fs, "f");
        let cg = SmoothnessCertificate::new(g0, g1, gs, "g");
        let hs = fs + gs + extra;
        let s = sum_params(&cf, &cg, hs).unwrap();
        let m = f1.max(g1);
        // each bound rebased to h*, minus the H1 overlap
        let h0 = (f0 + f1 * (hs - fs)) + (g0 + g1 * (hs - gs)) + (m - f1 - g1) * hs;
        agree_at("sum H0", s.h0, h0, f0 + g0 + (f1 + g1) * hs);
        prop_assert_eq!(s.h1, m);

        let a = DMatrix::from_row_slice(3, 2, &entries);
        let a2 = (a.transpose() * &a).symmetric_eigenvalues().max().max(0.0);
        let fstar = gs + extra;
        let c = affine_params(&cg, &a, fstar).unwrap();
        agree("affine H0", c.h0, a2 * g0 + a2 * g1 * extra);
        agree("affine H1", c.h1, a2 * g1);
    }

    #[test]
    fn bounds_double_entry(
        h0 in 0.01f64..10.0, h1 in prop_oneof![Just(0.0), 0.01f64..10.0], d0 in 1.5f64..1e4,
        eps in 1e-4f64..1.0, theta in 0.05f64..1.0, mu in 0.01f64..1.0, dist in 0.0f64..10.0,
    ) {
        let inputs = BoundInputs {
            h0: Some(h0), h1: Some(h1), delta0: Some(d0), eps: Some(eps),
            theta: Some(theta), mu: Some(mu), dist0: Some(dist),
        };
        for kind in BoundKind::ALL {
            let p = predict_bound(kind, inputs).unwrap();
            // lower bounds cross zero; measure them against their leading term
            let lead = h1 * d0 * d0 / (eps * eps) + h1 * d0 * (d0.ln() + eps.ln().abs()) / mu;
            agree_at(&format!("{kind:?}"), p.iters, bound_alt(kind, h0, h1, d0, eps, theta, mu, dist), lead);
        }
    }
}
