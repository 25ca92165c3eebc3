//! The controlled viscous Burgers equation: solver, the first/second order
//! expansion, scaling, and the drift and persistence experiments.

mod experiments;
mod expansion;
mod solver;

pub use expansion::{
    expansion_residual, project, rho_samples, scale_to_unit, solve_first_order_a, solve_second_order_b, steady_state,
    unscale_field, unscale_problem, ExpansionResidual, ScaledProblem,
};
pub use experiments::{
    drift_controls, drift_experiment, decomposition_run, h2_surrogate, persistence_check, persistence_sweep,
    random_control, AmplitudePolicy, DecompositionRecord, DriftRecord, DriftReport, FinalReport, Resolution,
    RANDOM_CONTROL_TERMS,
};
pub use solver::{max_principle_bound, solve_burgers, substeps_for, BurgersRun, Stepper, BLOW_UP_FACTOR, CFL_TARGET};
