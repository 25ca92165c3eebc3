use super::functions::one_coefficient;
use super::grid::{Control, Field, SpaceGrid, TimeGrid};
use super::sine::{SineBasis, SpectralState};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Decay factor and Duhamel weights of one mode over one step.
///
/// For `c' = -lambda c + f(t)` with `f` linear from `f0` to `f1` over `dt`:
/// `c(dt) = decay c(0) + w_start f0 + w_end f1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpWeights<T> {
    pub decay: T,
    pub w_start: T,
    pub w_end: T,
}

impl<T: Real> ExpWeights<T> {
    pub fn new(lambda: T, dt: T) -> Self {
        let z = lambda * dt;
        let decay = (-z).exp();
        // phi1 = (1 - e^{-z})/z and phi2 = (z - 1 + e^{-z})/z^2, both times dt.
        let (phi1, phi2) = if z < T::lit(0.05) {
            let mut p1 = T::zero();
            let mut p2 = T::zero();
            let mut term = T::one();
            let mut fact = T::one();
            for k in 0..14 {
                fact = fact * T::from_usize_lossy(k + 1);
                p1 = p1 + term / fact;
                p2 = p2 + term / (fact * T::from_usize_lossy(k + 2));
                term = -term * z;
            }
            (p1, p2)
        } else {
            let e = -(-z).exp_m1();
            (e / z, (z - e) / (z * z))
        };
        Self { decay, w_start: dt * (phi1 - phi2), w_end: dt * phi2 }
    }
}

/// Multiplies mode `n` by `exp(-nu n^2 pi^2 dt)`.
pub fn heat_propagate<T: Real>(state: &SpectralState<T>, nu: T, dt: T) -> Result<SpectralState<T>> {
    if !(nu > T::zero()) {
        return Err(Error::invalid("nu", "viscosity must be positive"));
    }
    if dt < T::zero() || !dt.is_finite() {
        return Err(Error::invalid("dt", "duration must be non-negative"));
    }
    let pi2 = T::PI() * T::PI();
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let n = T::from_usize_lossy(k + 1);
            c * (-nu * n * n * pi2 * dt).exp()
        })
        .collect();
    Ok(SpectralState { coeffs, viscosity: Some(nu) })
}

/// `nu n^2 pi^2` for `n = 1..=n_modes`.
pub fn dirichlet_eigenvalues<T: Real>(nu: T, n_modes: usize) -> Vec<T> {
    let pi2 = T::PI() * T::PI();
    (1..=n_modes)
        .map(|n| {
            let nf = T::from_usize_lossy(n);
            nu * nf * nf * pi2
        })
        .collect()
}

/// Right-hand side of the heat equation.
#[derive(Clone, Copy, Debug)]
pub enum HeatSource<'a, T> {
    None,
    /// Space-independent forcing `u(t)`.
    Scalar(&'a Control<T>),
    /// Space-time forcing sampled on the solution grids.
    Field(&'a Field<T>),
}

/// Duhamel integration of per-mode ODEs `c_n' = -lambda_n c_n + f_n(t)` with
/// `f_n` linear between time nodes; returns coefficients at every node.
pub fn duhamel_coefficients<T: Real>(
    lambdas: &[T],
    c0: &[T],
    sources: Option<&[Vec<T>]>,
    time: &TimeGrid<T>,
) -> Result<Vec<Vec<T>>> {
    let n_modes = lambdas.len();
    if c0.len() != n_modes {
        return Err(Error::DimensionMismatch { expected: n_modes, found: c0.len() });
    }
    if let Some(src) = sources {
        if src.len() != time.n_t() + 1 {
            return Err(Error::DimensionMismatch { expected: time.n_t() + 1, found: src.len() });
        }
        if let Some(bad) = src.iter().find(|s| s.len() != n_modes) {
            return Err(Error::DimensionMismatch { expected: n_modes, found: bad.len() });
        }
    }
    let weights: Vec<ExpWeights<T>> = lambdas.iter().map(|&l| ExpWeights::new(l, time.dt())).collect();
    let mut out = Vec::with_capacity(time.n_t() + 1);
    out.push(c0.to_vec());
    for k in 0..time.n_t() {
        let prev = &out[k];
        let next: Vec<T> = match sources {
            None => prev.iter().zip(&weights).map(|(&c, w)| w.decay * c).collect(),
            Some(src) => prev
                .iter()
                .zip(&weights)
                .zip(src[k].iter().zip(&src[k + 1]))
                .map(|((&c, w), (&f0, &f1))| w.decay * c + w.w_start * f0 + w.w_end * f1)
                .collect(),
        };
        out.push(next);
    }
    Ok(out)
}

/// Heat solve `z_t - nu z_xx = f`, `z = 0` on the boundary, `z(0) = z0`, using
/// `n_x` sine modes and exact per-mode exponential integration.
pub fn solve_heat_dirichlet<T: Real>(
    nu: T,
    source: HeatSource<'_, T>,
    z0: &[T],
    time: TimeGrid<T>,
    space: SpaceGrid<T>,
) -> Result<Field<T>> {
    let basis = SineBasis::new(space);
    let coeffs = solve_heat_spectral(nu, source, z0, &time, &basis)?;
    let values = coeffs.iter().map(|c| basis.synthesize_coeffs(c)).collect::<Result<Vec<_>>>()?;
    Field::new(values, time, space)
}

/// As [`solve_heat_dirichlet`] but returns the sine coefficients at each node.
pub fn solve_heat_spectral<T: Real>(
    nu: T,
    source: HeatSource<'_, T>,
    z0: &[T],
    time: &TimeGrid<T>,
    basis: &SineBasis<T>,
) -> Result<Vec<Vec<T>>> {
    if !(nu > T::zero()) {
        return Err(Error::invalid("nu", "viscosity must be positive"));
    }
    let n = basis.n_x();
    let c0 = basis.analyze(z0, n)?.coeffs;
    let lambdas = dirichlet_eigenvalues(nu, n);
    let sources: Option<Vec<Vec<T>>> = match source {
        HeatSource::None => None,
        HeatSource::Scalar(u) => {
            if u.grid() != time {
                return Err(Error::DimensionMismatch { expected: time.n_t() + 1, found: u.samples().len() });
            }
            let g: Vec<T> = (1..=n).map(one_coefficient).collect();
            Some(u.samples().iter().map(|&uk| g.iter().map(|&gn| gn * uk).collect()).collect())
        }
        HeatSource::Field(f) => {
            if f.time_grid() != time || f.space_grid() != basis.grid() {
                return Err(Error::DimensionMismatch { expected: time.n_t() + 1, found: f.rows().len() });
            }
            Some(f.rows().iter().map(|row| basis.analyze(row, n).map(|s| s.coeffs)).collect::<Result<_>>()?)
        }
    };
    duhamel_coefficients(&lambdas, &c0, sources.as_deref(), time)
}
