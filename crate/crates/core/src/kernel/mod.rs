//! The exact and asymptotic quadratic kernels, their generators, residual
//! diagnostics, and the weakly-singular-kernel tools.

mod asymptotic;
mod exact;
mod extend;
mod ibp;
mod matrix;
mod wsio;

pub use asymptotic::{assemble_k0, assemble_k0_at, k0_unit_form, k0_value};
pub use exact::{
    assemble_k_eps, assemble_k_eps_at, erf_identity, erf_identity_integrand, generator_a, layer_product_limit,
    leading_coefficient, residual_from, residual_matrix, Generator, GeneratorSample, KernelEvaluator, KernelQuadrature,
};
pub use extend::{extend_kernel, ExtendedKernel};
pub use ibp::{ibp_transform_check, IbpCheck};
pub use matrix::{midpoint_nodes, KernelMatrix};
pub use wsio::{estimate_wsio_kappa, mixed_derivative, WsioEstimate, DEFAULT_DELTA};
