//! Closed-form constants, closure transforms, iteration-count bounds and
//! lemma checkers.

mod bounds;
mod constants;
mod lemmas;
mod transforms;

pub use bounds::{predict_bound, BoundInputs, BoundKind, BoundPrediction};
pub use constants::{
    deep_leaky_constants, deep_linear_constants, semi_linear_constants, two_layer_ce_constants,
    two_layer_mse_constants,
};
pub use lemmas::{
    check_condition, check_descent_along, check_descent_step, check_gradient_bound, check_linear_decrease,
    write_reports_csv, ConditionKind, LemmaCheck, LemmaReport, Status,
};
pub use transforms::{affine_params, l0l1_to_h0h1, nu, rho_reduction, spectral_norm, sum_params};
