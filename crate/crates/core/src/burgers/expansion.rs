use super::solver::BurgersRun;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{rho_eval, solve_heat_dirichlet, Control, Field, HeatSource, SineBasis, SpaceGrid, TimeGrid};

/// A problem on `(0, T)` with unit viscosity rewritten on `(0, 1)` with viscosity `eps = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledProblem<T> {
    pub eps: T,
    /// `eps^2 u(eps t)` on `(0, 1)`.
    pub control: Control<T>,
    /// `eps y0`.
    pub y0: Vec<T>,
}

/// `u~(t) = eps^2 u(eps t)`, `y0~ = eps y0` with `eps` the horizon of `u`.
pub fn scale_to_unit<T: Real>(u: &Control<T>, y0: &[T]) -> Result<ScaledProblem<T>> {
    let eps = u.grid().horizon();
    if !(eps > T::zero()) {
        return Err(Error::invalid("T", "horizon must be positive"));
    }
    let grid = TimeGrid::new(u.grid().n_t(), T::one())?;
    let control = Control::new(grid, u.samples().iter().map(|&v| eps * eps * v).collect())?;
    Ok(ScaledProblem { eps, control, y0: y0.iter().map(|&v| eps * v).collect() })
}

/// Inverse of [`scale_to_unit`] for the control and initial datum.
pub fn unscale_problem<T: Real>(p: &ScaledProblem<T>) -> Result<(Control<T>, Vec<T>)> {
    let eps = p.eps;
    let grid = TimeGrid::new(p.control.grid().n_t(), eps)?;
    let u = Control::new(grid, p.control.samples().iter().map(|&v| v / (eps * eps)).collect())?;
    Ok((u, p.y0.iter().map(|&v| v / eps).collect()))
}

/// `y(t, x) = y~(t / eps, x) / eps` for a field on `(0, 1)`.
pub fn unscale_field<T: Real>(eps: T, field: &Field<T>) -> Result<Field<T>> {
    if !(eps > T::zero()) {
        return Err(Error::invalid("eps", "must be positive"));
    }
    let grid = TimeGrid::new(field.time_grid().n_t(), field.time_grid().horizon() * eps)?;
    let rows = field.rows().iter().map(|r| r.iter().map(|&v| v / eps).collect()).collect();
    Field::new(rows, grid, *field.space_grid())
}

/// First-order state: `a_t - eps a_xx = u(t)`, `a(0) = 0`.
pub fn solve_first_order_a<T: Real>(eps: T, u: &Control<T>, space: SpaceGrid<T>) -> Result<Field<T>> {
    let zero = vec![T::zero(); space.n_x()];
    solve_heat_dirichlet(eps, HeatSource::Scalar(u), &zero, *u.grid(), space)
}

/// Second-order state: `b_t - eps b_xx = -a a_x`, `b(0) = 0`.
pub fn solve_second_order_b<T: Real>(eps: T, a: &Field<T>) -> Result<Field<T>> {
    let space = *a.space_grid();
    let basis = SineBasis::new(space);
    let n = space.n_x();
    let source_rows = a
        .rows()
        .iter()
        .map(|row| {
            let c = basis.analyze(row, n)?.coeffs;
            let (v, d) = basis.synthesize_with_derivative(&c)?;
            Ok(v.iter().zip(&d).map(|(&p, &q)| -p * q).collect())
        })
        .collect::<Result<Vec<Vec<T>>>>()?;
    let source = Field::new(source_rows, *a.time_grid(), space)?;
    let zero = vec![T::zero(); n];
    solve_heat_dirichlet(eps, HeatSource::Field(&source), &zero, *a.time_grid(), space)
}

/// `int_0^1 profile * field` by the trapezoid rule (boundary values are zero).
pub fn project<T: Real>(profile: &[T], field: &[T], space: &SpaceGrid<T>) -> Result<T> {
    if profile.len() != space.n_x() || field.len() != space.n_x() {
        return Err(Error::DimensionMismatch { expected: space.n_x(), found: profile.len().min(field.len()) });
    }
    Ok(profile.iter().zip(field).map(|(&p, &f)| p * f).sum::<T>() * space.h())
}

/// `rho` on the interior nodes.
pub fn rho_samples<T: Real>(space: &SpaceGrid<T>) -> Vec<T> {
    space.sample(|x| rho_eval(x, 0).expect("order 0"))
}

/// Second-order remainder `r = y - a - b` and its size.
#[derive(Clone, Debug)]
pub struct ExpansionResidual<T> {
    pub r: Field<T>,
    pub l2: T,
    pub time_derivative_l2: T,
    /// `<rho, r(1)>`.
    pub drift: T,
}

pub fn expansion_residual<T: Real>(run: &BurgersRun<T>) -> Result<ExpansionResidual<T>> {
    let eps = run.viscosity;
    let space = *run.trajectory.space_grid();
    if run.y0.iter().any(|&v| v != T::zero()) {
        return Err(Error::invalid("run", "expansion assumes zero initial data"));
    }
    let a = solve_first_order_a(eps, &run.control, space)?;
    let b = solve_second_order_b(eps, &a)?;
    let r = run.trajectory.sub(&a)?.sub(&b)?;
    let drift = project(&rho_samples(&space), r.last(), &space)?;
    Ok(ExpansionResidual { l2: r.l2_norm(), time_derivative_l2: r.time_derivative_l2(), drift, r })
}

/// Steady states `a = x(1-x) u/(2 eps)` and `b = rho u^2/(8 eps^3)` for a constant control.
pub fn steady_state<T: Real>(level: T, eps: T, space: &SpaceGrid<T>) -> Result<(Vec<T>, Vec<T>)> {
    if !(eps > T::zero()) {
        return Err(Error::invalid("eps", "viscosity must be positive"));
    }
    let a = space.sample(|x| x * (T::one() - x) * level / (T::lit(2.0) * eps));
    let b = space.sample(|x| rho_eval(x, 0).expect("order 0") * level * level / (T::lit(8.0) * eps * eps * eps));
    Ok((a, b))
}
