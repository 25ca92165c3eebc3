//! Numerical laboratory for the quadratic drift of the viscous Burgers
//! equation driven by a scalar (space-independent) control.
//!
//! Every routine is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the tests and the command-line tool use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod burgers;
pub mod coercivity;
pub mod control_opt;
pub mod error;
pub mod findim;
pub mod kernel;
pub mod linalg;
pub mod scalar;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = linalg::Matrix<f64>;
pub type SpaceGrid = spectral::SpaceGrid<f64>;
pub type TimeGrid = spectral::TimeGrid<f64>;
pub type Field = spectral::Field<f64>;
pub type Control = spectral::Control<f64>;
pub type SpectralState = spectral::SpectralState<f64>;
pub type KernelMatrix = kernel::KernelMatrix<f64>;
pub type KernelEvaluator = kernel::KernelEvaluator<f64>;
pub type GramOperator = coercivity::GramOperator<f64>;
pub type BurgersRun = burgers::BurgersRun<f64>;
pub type FinDimSystem = findim::FinDimSystem<f64>;
pub type OptRun = control_opt::OptRun<f64>;
