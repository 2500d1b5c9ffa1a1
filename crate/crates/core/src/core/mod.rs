//! Parameter vectors, the objective contract and finite-difference oracles.

mod fd;
mod objective;
mod param;

pub use fd::{
    default_fd_step, dense_hessian_fd, dense_hessian_fd_capped, finite_diff_gradient,
    finite_diff_hvp, DEFAULT_HESSIAN_CAP,
};
pub use objective::{norm, EvalRecord, Objective};
pub use param::{ParamPoint, Shape};
