//! SGD on an interpolating least-squares problem with the per-batch
//! adaptive step: every step moves closer to the solution set.
//!
//!     cargo run --release --example sgd_interpolation

use warmup_lab::optimize::{attach_distance_tracking, run_sgd, StopRule};
use warmup_lab::problems::make_interpolating_least_squares;
use warmup_lab::schedules::StepPolicy;
use warmup_lab::theory::{check_condition, ConditionKind};

fn main() -> warmup_lab::Result<()> {
    let ls = make_interpolating_least_squares(10, 20, 0)?;
    let h0 = ls.uniform_component_certificate().h0;
    let w0 = vec![0.0; 20];
    let traj = run_sgd(&ls, &w0, &StepPolicy::adaptive(h0, 0.0, 0.0), 2, 0, &StopRule::iters(2000))?;
    let traj = attach_distance_tracking(traj, &ls)?;

    for r in traj.records.iter().step_by(250) {
        println!("iter {:>5}  f = {:.3e}  dist = {:.4}", r.iter, r.f, r.dist_to_solution.unwrap());
    }
    let increases = traj
        .records
        .windows(2)
        .filter(|p| p[1].dist_to_solution.unwrap() > p[0].dist_to_solution.unwrap() + 1e-12)
        .count();
    println!("steps where the distance grew: {increases}");

    let points: Vec<Vec<f64>> = (0..traj.iterations()).step_by(100).filter_map(|k| traj.snapshot(k).map(<[f64]>::to_vec)).collect();
    let interp = check_condition(ConditionKind::Interpolation, &ls, &points)?;
    let aiming = check_condition(ConditionKind::Aiming { theta: 1.0 }, &ls, &points)?;
    println!(
        "interpolation holds at {}/{} iterates, aiming (θ = 1) at {}/{}",
        interp.n_checked() - interp.n_violations(),
        interp.n_checked(),
        aiming.n_checked() - aiming.n_violations(),
        aiming.n_checked()
    );
    Ok(())
}
