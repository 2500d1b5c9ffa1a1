//! Named problems constructible from a config parameter table.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::config::ProblemSpec;
use crate::core::Objective;
use crate::error::{LabError, Result};
use crate::problems::{
    make_balanced_init, make_counterexample, make_deep_leaky, make_deep_linear, make_exp_quadratic,
    make_interpolating_least_squares, make_pl_lower_bound, make_pl_sin_quadratic, make_runway, make_semi_linear,
    make_two_layer_ce_l2, make_two_layer_mse_l2, ActivationSpec, Balance, CounterexampleKind, DatasetPair,
    NetObjective, Quadratic, SmoothnessCertificate,
};
use crate::rng::{normal_matrix, normal_vec, seeded};
use crate::smoothness::{BalancedSampler, BoxSampler, LayerFloorSampler, Sampler};
use crate::theory::{
    deep_leaky_constants, deep_linear_constants, semi_linear_constants, two_layer_ce_constants,
    two_layer_mse_constants,
};

pub const PROBLEMS: &[&str] = &[
    "quadratic",
    "exp_quadratic",
    "runway",
    "pl_lower_bound",
    "pl_sin_quadratic",
    "least_squares",
    "deep_linear",
    "semi_linear",
    "deep_leaky",
    "two_layer_mse",
    "two_layer_ce",
    "counterexample",
];

pub struct BuiltProblem {
    pub obj: Arc<dyn Objective>,
    pub w0: Vec<f64>,
    /// Certificate for the region the problem is claimed on, if one exists.
    pub cert: Option<SmoothnessCertificate>,
    /// Present for network problems, for region diagnostics.
    pub net: Option<Arc<NetObjective>>,
    /// Draws points from the region the certificate is claimed on.
    pub sampler: Arc<dyn Sampler>,
}

/// Margin kept from leaky-ReLU kinks when sampling network regions.
pub const KINK_MARGIN: f64 = 1e-4;

fn boxed(dim: usize, r: f64, seed: u64) -> Arc<dyn Sampler> {
    Arc::new(BoxSampler::new(dim, -r, r, seed))
}

struct Params<'a> {
    table: &'a toml::Table,
    problem: &'a str,
}

impl Params<'_> {
    fn err(&self, key: &str, what: &str) -> LabError {
        LabError::Config(format!("problem '{}': parameter '{key}' {what}", self.problem))
    }

    fn f(&self, key: &str, default: f64) -> Result<f64> {
        match self.table.get(key) {
            None => Ok(default),
            Some(toml::Value::Float(x)) => Ok(*x),
            Some(toml::Value::Integer(i)) => Ok(*i as f64),
            Some(_) => Err(self.err(key, "must be a number")),
        }
    }

    fn u(&self, key: &str, default: usize) -> Result<usize> {
        match self.table.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(_) => Err(self.err(key, "must be a non-negative integer")),
        }
    }

    fn s<'b>(&'b self, key: &str, default: &'b str) -> Result<&'b str> {
        match self.table.get(key) {
            None => Ok(default),
            Some(toml::Value::String(s)) => Ok(s),
            Some(_) => Err(self.err(key, "must be a string")),
        }
    }

    fn vf(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Ok(*x),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    _ => Err(self.err(key, "must be a list of numbers")),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => Err(self.err(key, "must be a list")),
        }
    }

    fn vu(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.vf(key)? {
            None => Ok(default.to_vec()),
            Some(v) if v.iter().all(|x| *x >= 1.0 && x.fract() == 0.0) => Ok(v.iter().map(|x| *x as usize).collect()),
            Some(_) => Err(self.err(key, "must be a list of positive integers")),
        }
    }

    fn check_known(&self, known: &[&str]) -> Result<()> {
        for k in self.table.keys() {
            if !known.contains(&k.as_str()) {
                return Err(self.err(k, &format!("is not recognised (expected one of: {})", known.join(", "))));
            }
        }
        Ok(())
    }
}

fn activation(p: &Params, key: &str) -> Result<ActivationSpec> {
    match p.s(key, "tanh")? {
        "tanh" => Ok(ActivationSpec::tanh()),
        "identity" => Ok(ActivationSpec::identity()),
        "leaky_relu" => ActivationSpec::leaky_relu(p.f("b", 0.5)?),
        other => Err(p.err(key, &format!("has unknown activation '{other}'"))),
    }
}

fn start(p: &Params, dim: usize, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>> {
    match p.vf("w0")? {
        Some(w) if w.len() == dim => Ok(w),
        Some(w) => Err(p.err("w0", &format!("has length {} but the problem has dimension {dim}", w.len()))),
        None => Ok(default()),
    }
}

/// Binary labels from a random teacher direction.
pub fn teacher_labels(d: usize, m: usize, seed: u64) -> Result<DatasetPair> {
    let mut rng = seeded(seed);
    let x = normal_matrix(d, m, &mut rng);
    let v = normal_vec(d, &mut rng);
    let y = DMatrix::from_fn(1, m, |_, j| {
        let s: f64 = (0..d).map(|i| v[i] * x[(i, j)]).sum();
        if s > 0.0 {
            1.0
        } else {
            0.0
        }
    });
    DatasetPair::new(x, y)
}

fn scaled_normal(dim: usize, scale: f64, seed: u64) -> Vec<f64> {
    normal_vec(dim, &mut seeded(seed)).into_iter().map(|x| x * scale).collect()
}

pub fn build_problem(spec: &ProblemSpec, seed: u64) -> Result<BuiltProblem> {
    let p = Params { table: &spec.params, problem: &spec.name };
    let plain = |obj: Arc<dyn Objective>, w0, cert, sampler| BuiltProblem { obj, w0, cert, net: None, sampler };
    match spec.name.as_str() {
        "quadratic" => {
            p.check_known(&["diag", "w0"])?;
            let diag = p.vf("diag")?.unwrap_or_else(|| vec![1.0, 1.0]);
            let q = Quadratic::diagonal(&diag);
            let w0 = start(&p, diag.len(), || vec![1.0; diag.len()])?;
            let cert = diag.iter().all(|d| *d >= 0.0).then(|| q.certificate());
            Ok(plain(Arc::new(q), w0, cert, boxed(diag.len(), 3.0, seed)))
        }
        "exp_quadratic" => {
            p.check_known(&["h1", "m", "w0"])?;
            let f = make_exp_quadratic(p.f("h1", 1.0)?, p.f("m", std::f64::consts::E.powi(3))?)?;
            let w0 = start(&p, 1, || vec![f.w0()])?;
            let cert = f.certificate().rebased(0.5)?;
            let r = w0[0].abs() + 1.0;
            Ok(plain(Arc::new(f), w0, Some(cert), boxed(1, r, seed)))
        }
        "runway" => {
            p.check_known(&["h0", "h1", "delta", "w0"])?;
            let f = make_runway(p.f("h0", 1.0)?, p.f("h1", 2.0)?, p.f("delta", 0.005)?)?;
            let w0 = start(&p, 1, || vec![f.x2])?;
            let cert = f.certificate();
            let r = 2.0 * w0[0].abs().max(f.x2) + 1.0;
            Ok(plain(Arc::new(f), w0, Some(cert), boxed(1, r, seed)))
        }
        "pl_lower_bound" => {
            p.check_known(&["c0", "mu", "h1", "w0"])?;
            let f = make_pl_lower_bound(p.f("c0", 1.0)?, p.f("mu", 0.5)?, p.f("h1", 1.0)?)?;
            let w0 = start(&p, 1, || vec![f.w0()])?;
            let cert = f.certificate();
            let r = w0[0].abs() + 1.0;
            Ok(plain(Arc::new(f), w0, Some(cert), boxed(1, r, seed)))
        }
        "pl_sin_quadratic" => {
            p.check_known(&["w0"])?;
            let f = make_pl_sin_quadratic();
            let w0 = start(&p, 1, || vec![3.0])?;
            let cert = f.certificate();
            Ok(plain(Arc::new(f), w0, Some(cert), boxed(1, 10.0, seed)))
        }
        "least_squares" => {
            p.check_known(&["n", "d", "w0", "init_scale"])?;
            let (n, d) = (p.u("n", 10)?, p.u("d", 20)?);
            let ls = make_interpolating_least_squares(n, d, seed)?;
            let scale = p.f("init_scale", 1.0)?;
            let w0 = start(&p, d, || scaled_normal(d, scale, seed.wrapping_add(1)))?;
            let cert = ls.certificate();
            Ok(plain(Arc::new(ls), w0, Some(cert), boxed(d, 2.0, seed)))
        }
        "deep_linear" | "semi_linear" | "deep_leaky" => {
            p.check_known(&["dims", "m", "scale", "balance", "b", "h", "slopes", "floors", "w0"])?;
            let dims = p.vu("dims", &[2, 2, 2, 2])?;
            if dims.len() < 3 {
                return Err(p.err("dims", "needs at least two layers"));
            }
            let l = dims.len() - 1;
            let data = DatasetPair::random(dims[l], dims[0], p.u("m", 8)?, seed)?;
            let balance = match p.s("balance", if spec.name == "deep_linear" { "strong" } else { "weak" })? {
                "strong" => Balance::Strong,
                "weak" => Balance::Weak,
                other => return Err(p.err("balance", &format!("must be strong or weak, got '{other}'"))),
            };
            let init = make_balanced_init(&dims, p.f("scale", 1.0)?, balance, seed.wrapping_add(1))?.into_data();
            let (lo, hi) = (0.5, 2.0);
            let (net, cert, sampler): (_, _, Arc<dyn Sampler>) = match spec.name.as_str() {
                "deep_linear" => {
                    let cert = deep_linear_constants(&data, &dims, 0.0)?.conservative();
                    (Arc::new(make_deep_linear(data, &dims)?), cert, Arc::new(BalancedSampler::new(&dims, lo, hi, seed)))
                }
                "semi_linear" => {
                    let (b, h) = (p.f("b", 0.5)?, p.f("h", 0.1)?);
                    let cert = semi_linear_constants(&data, &dims, b, h)?;
                    let net = Arc::new(make_semi_linear(data, &dims, b)?);
                    let mut floors = vec![0.0; l];
                    floors[0] = h;
                    let s = LayerFloorSampler::new(&dims, &floors, lo, hi, seed)?
                        .with_strong_tail(1)
                        .with_kink_guard(net.clone(), KINK_MARGIN);
                    (net, cert, Arc::new(s))
                }
                _ => {
                    let slopes = p.vf("slopes")?.unwrap_or_else(|| vec![0.5; l - 1]);
                    let floors = p.vf("floors")?.unwrap_or_else(|| vec![0.1; l - 1]);
                    let cert = deep_leaky_constants(&data, &dims, &slopes, &floors)?;
                    let net = Arc::new(make_deep_leaky(data, &dims, &slopes)?);
                    let mut layer_floors = floors.clone();
                    layer_floors.push(0.0);
                    let s = LayerFloorSampler::new(&dims, &layer_floors, lo, hi, seed)?
                        .with_kink_guard(net.clone(), KINK_MARGIN);
                    (net, cert, Arc::new(s))
                }
            };
            let w0 = start(&p, net.dim(), || init)?;
            Ok(BuiltProblem { obj: net.clone(), w0, cert: Some(cert), net: Some(net), sampler })
        }
        "two_layer_mse" | "two_layer_ce" => {
            p.check_known(&["d", "hidden", "m", "c", "lambda1", "lambda2", "activation", "b", "init_scale", "w0"])?;
            let (d, hidden, m) = (p.u("d", 4)?, p.u("hidden", 16)?, p.u("m", 64)?);
            let act = activation(&p, "activation")?;
            let (l1, l2) = (p.f("lambda1", 0.01)?, p.f("lambda2", 0.01)?);
            let (net, cert) = if spec.name == "two_layer_mse" {
                let data = DatasetPair::random(d, p.u("c", 1)?, m, seed)?;
                let cert = two_layer_mse_constants(&act, data.x_norm, l1, l2).ok();
                (make_two_layer_mse_l2(data, hidden, act, l1, l2)?, cert)
            } else {
                let data = teacher_labels(d, m, seed)?;
                let cert = two_layer_ce_constants(&act, data.x_norm, l1, l2).ok();
                (make_two_layer_ce_l2(data, hidden, act, l1, l2)?, cert)
            };
            let net = Arc::new(net);
            let scale = p.f("init_scale", 0.5)?;
            let w0 = start(&p, net.dim(), || scaled_normal(net.dim(), scale, seed.wrapping_add(1)))?;
            let sampler = boxed(net.dim(), 2.0, seed);
            Ok(BuiltProblem { obj: net.clone(), w0, cert, net: Some(net), sampler })
        }
        "counterexample" => {
            p.check_known(&["kind", "lambda1", "lambda2", "b", "w0"])?;
            let kind = match p.s("kind", "two_layer_l2")? {
                "sum_sin_square" => CounterexampleKind::SumSinSquare,
                "affine_cos_exp" => CounterexampleKind::AffineCosExp,
                "two_layer_l2" => CounterexampleKind::TwoLayerL2 {
                    lambda1: p.f("lambda1", 0.1)?,
                    lambda2: p.f("lambda2", 0.1)?,
                },
                "balanced_two_layer" => CounterexampleKind::BalancedTwoLayer { b: p.f("b", 1.0)? },
                other => return Err(p.err("kind", &format!("unknown counterexample '{other}'"))),
            };
            let c = make_counterexample(kind)?;
            let dim = c.dim();
            let w0 = start(&p, dim, || vec![1.0; dim])?;
            Ok(plain(Arc::new(c), w0, None, boxed(dim, 3.0, seed)))
        }
        other => Err(LabError::Config(format!("unknown problem '{other}'; available: {}", PROBLEMS.join(", ")))),
    }
}
