//! Executing configs and persisting run directories.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, OptimizerSpec};
use super::registry::{build_problem, BuiltProblem};
use crate::error::{LabError, Result};
use crate::optimize::{attach_distance_tracking, run_gd, run_sgd, Trajectory, TrajectorySummary};
use crate::rng::PRNG_ID;
use crate::smoothness::{local_smoothness_trace, write_trace_csv, SecantMode};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const OUT_ENV: &str = "WARMUP_LAB_OUT";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TRACE_FILE: &str = "smoothness_trace.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub trajectory: PathBuf,
    pub summary: PathBuf,
    pub smoothness_trace: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub config: ExperimentConfig,
    pub summary: TrajectorySummary,
    pub artifacts: Artifacts,
    pub tool_version: String,
    pub prng: String,
    pub duration_secs: f64,
    pub smoothness_samples: usize,
}

/// Output root: $WARMUP_LAB_OUT, else the config's `outputs`, else ./outputs.
pub fn output_root(configured: Option<&Path>) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => configured.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("outputs")),
    }
}

/// Hash of (config snapshot, seed, tool version); the output location is
/// not part of the identity.
pub fn run_id(cfg: &ExperimentConfig) -> Result<String> {
    let mut snapshot = cfg.clone();
    snapshot.outputs = None;
    let mut h = Sha256::new();
    h.update(snapshot.to_toml()?.as_bytes());
    h.update(cfg.seed.to_le_bytes());
    h.update(TOOL_VERSION.as_bytes());
    Ok(hex::encode(h.finalize())[..16].to_string())
}

/// Runs one (already expanded) config without touching the filesystem.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Trajectory> {
    simulate_built(&build_problem(&cfg.problem, cfg.seed)?, cfg)
}

fn simulate_built(built: &BuiltProblem, cfg: &ExperimentConfig) -> Result<Trajectory> {
    let obj = built.obj.as_ref();
    let mut traj = match cfg.optimizer {
        OptimizerSpec::Gd => run_gd(obj, &built.w0, &cfg.policy, &cfg.stop)?,
        OptimizerSpec::Sgd { batch_size } => run_sgd(obj, &built.w0, &cfg.policy, batch_size, cfg.seed, &cfg.stop)?,
    };
    if obj.project_solution(&built.w0).is_some() {
        traj = attach_distance_tracking(traj, obj)?;
    }
    Ok(traj)
}

pub fn execute(cfg: &ExperimentConfig, out_root: &Path) -> Result<RunRecord> {
    if !cfg.sweep.is_empty() {
        return Err(LabError::Config("execute takes a single expanded config".into()));
    }
    let started = Instant::now();
    let built = build_problem(&cfg.problem, cfg.seed)?;
    let traj = simulate_built(&built, cfg)?;
    let mode = match cfg.optimizer {
        OptimizerSpec::Gd => SecantMode::Deterministic,
        OptimizerSpec::Sgd { .. } => SecantMode::Stochastic,
    };
    let trace = local_smoothness_trace(built.obj.as_ref(), &traj, mode)?;

    let id = run_id(cfg)?;
    let dir = out_root.join(&id);
    fs::create_dir_all(&dir)?;
    let artifacts = Artifacts {
        trajectory: dir.join(TRAJECTORY_FILE),
        summary: dir.join(SUMMARY_FILE),
        smoothness_trace: dir.join(TRACE_FILE),
    };
    traj.write_csv(fs::File::create(&artifacts.trajectory)?)?;
    write_trace_csv(&trace.samples, fs::File::create(&artifacts.smoothness_trace)?)?;
    let record = RunRecord {
        run_id: id,
        config: cfg.clone(),
        summary: traj.summary(),
        artifacts,
        tool_version: TOOL_VERSION.into(),
        prng: PRNG_ID.into(),
        duration_secs: started.elapsed().as_secs_f64(),
        smoothness_samples: trace.samples.len(),
    };
    fs::write(&record.artifacts.summary, serde_json::to_string_pretty(&record)?)?;
    Ok(record)
}

/// Parses, expands and executes a config file; sweeps run in parallel on
/// `jobs` threads (default: all hardware threads).
pub fn cli_run(config_path: &Path, jobs: Option<usize>) -> Result<Vec<RunRecord>> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| LabError::Io(format!("{}: {e}", config_path.display())))?;
    let cfg = ExperimentConfig::parse(&text)
        .map_err(|e| e.in_file(config_path))?;
    run_config(&cfg, jobs)
}

pub fn run_config(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<RunRecord>> {
    let root = output_root(cfg.outputs.as_deref());
    let runs = cfg.expand()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    pool.install(|| runs.par_iter().map(|c| execute(c, &root)).collect())
}
