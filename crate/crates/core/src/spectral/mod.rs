//! Grids, the Dirichlet sine basis, heat solvers and the special profiles
//! shared by the kernel, coercivity and simulation modules.

mod functions;
mod grid;
mod heat;
mod riesz;
mod sine;

pub use functions::{
    corrector_h, elementary_g, erf_layer, g_image_series, g_sine_series, one_coefficient, rho_coefficient, rho_eval,
    rho_xx_coefficient, sigma, solve_phi, PhiFields, PhiSeries, G_CROSSOVER,
};
pub use grid::{Control, Field, SpaceGrid, TimeGrid};
pub use heat::{
    dirichlet_eigenvalues, duhamel_coefficients, heat_propagate, solve_heat_dirichlet, solve_heat_spectral, ExpWeights,
    HeatSource,
};
pub use riesz::{
    plus_cell_matrix, reflected_plus_cell_matrix, riesz_cell_matrix, riesz_form, second_difference_32, weak_norm_sq,
};
pub use sine::{SineBasis, SpectralState};
