//! Config-driven runs, persisted artifacts, canned experiments and reports.

mod config;
mod experiments;
mod registry;
mod report;
mod run;
mod tools;

pub use config::{ExperimentConfig, OptimizerSpec, ProblemFile, ProblemSpec, DEFAULT_SWEEP_CAP};
pub use experiments::{
    cli_experiment, closure_demo, lower_bound_demo, practical_warmup, runway_count, smoothness_vs_loss, threshold_check,
    warmup_vs_constant, ClosureDemo, ExperimentReport, LowerBoundDemo, PracticalWarmup, RunwayCount, SmoothnessVsLoss,
    SmoothnessVsLossSetup, ThresholdCheck, WarmupComparison, EXPERIMENTS, WITNESS_GRAD, WITNESS_HESS,
};
pub use registry::{build_problem, teacher_labels, BuiltProblem, KINK_MARGIN, PROBLEMS};
pub use report::{emit_report, Report};
pub use run::{
    cli_run, execute, output_root, run_config, run_id, simulate, Artifacts, RunRecord, OUT_ENV, SUMMARY_FILE,
    TOOL_VERSION, TRACE_FILE, TRAJECTORY_FILE,
};
pub use tools::{cli_constants, cli_lemmas, cli_verify, load_problem, parse_cert_arg};
