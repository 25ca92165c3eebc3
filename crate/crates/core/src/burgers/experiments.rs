use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::expansion::{project, rho_samples};
use super::solver::solve_burgers;
use crate::error::{Error, Result};
use crate::linalg::loglog_slope;
use crate::scalar::Real;
use crate::spectral::{weak_norm_sq, Control, SineBasis, SpaceGrid, TimeGrid};

/// Space and time resolution of a simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub n_x: usize,
    pub n_t: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { n_x: 511, n_t: 400 }
    }
}

impl Resolution {
    pub fn grids<T: Real>(&self, horizon: T) -> Result<(SpaceGrid<T>, TimeGrid<T>)> {
        Ok((SpaceGrid::new(self.n_x)?, TimeGrid::new(self.n_t, horizon)?))
    }
}

/// Terms in the random sine series.
pub const RANDOM_CONTROL_TERMS: usize = 8;

/// `sum_k z_k / k sin(k pi t / T)` with standard normal `z_k`, rescaled to
/// the requested `L^2(0,T)` norm.
pub fn random_control<T: Real>(grid: TimeGrid<T>, l2: T, rng: &mut impl Rng) -> Control<T> {
    let z: Vec<f64> = (0..RANDOM_CONTROL_TERMS).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let horizon = grid.horizon();
    let raw = Control::from_fn(grid, |t| {
        z.iter()
            .enumerate()
            .map(|(k, &zk)| {
                let kf = T::from_usize_lossy(k + 1);
                T::lit(zk) / kf * (kf * T::PI() * t / horizon).sin()
            })
            .sum()
    });
    let norm = raw.l2_norm();
    if norm == T::zero() {
        return raw;
    }
    raw.scaled(l2 / norm)
}

/// How the control size is drawn, as a fraction of the budget `eps^{3/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AmplitudePolicy {
    Fixed(f64),
    Uniform { lo: f64, hi: f64 },
}

impl AmplitudePolicy {
    fn validate(&self) -> Result<()> {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        match *self {
            AmplitudePolicy::Fixed(f) if ok(f) => Ok(()),
            AmplitudePolicy::Uniform { lo, hi } if ok(lo) && ok(hi) && lo <= hi => Ok(()),
            _ => Err(Error::invalid("amplitude", "fractions must lie in [0, 1]")),
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            AmplitudePolicy::Fixed(f) => f,
            AmplitudePolicy::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
        }
    }
}

/// Seeded controls for the drift experiment: `L^2(0,1)` norms are the drawn
/// fraction of `eps^{3/2}`.
pub fn drift_controls<T: Real>(eps: T, count: usize, seed: u64, policy: AmplitudePolicy, grid: TimeGrid<T>) -> Result<Vec<Control<T>>> {
    policy.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = eps * eps.sqrt();
    Ok((0..count)
        .map(|_| {
            let frac = policy.draw(&mut rng);
            random_control(grid, budget * T::lit(frac), &mut rng)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftRecord<T> {
    pub index: usize,
    pub control_l2: T,
    /// `<rho, y(1)>`, `None` when the solve failed.
    pub projection: Option<T>,
    /// Weak norm `R(U)` of the control primitive.
    pub weak_norm: T,
    /// `<rho, y(1)> / (sqrt(eps) R(U))`; `None` for a zero control or failed solve.
    pub ratio: Option<T>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport<T> {
    pub eps: T,
    pub records: Vec<DriftRecord<T>>,
    /// Smallest ratio over samples with a nonzero control.
    pub k2: Option<T>,
}

impl<T: Real> DriftReport<T> {
    pub fn all_positive(&self) -> bool {
        self.records.iter().all(|r| matches!(r.projection, Some(p) if p > T::zero()))
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.failure.is_some()).count()
    }
}

/// Drift of `<rho, y(1)>` from zero initial data at viscosity `eps` under
/// seeded small controls; runs are independent and collected in index order.
pub fn drift_experiment<T: Real>(eps: T, count: usize, seed: u64, policy: AmplitudePolicy, res: Resolution) -> Result<DriftReport<T>> {
    if !(eps > T::zero() && eps <= T::lit(0.1)) {
        return Err(Error::invalid("eps", "drift experiment needs 0 < eps <= 0.1"));
    }
    let (space, time) = res.grids(T::one())?;
    let controls = drift_controls(eps, count, seed, policy, time)?;
    let rho = rho_samples(&space);
    let zero = vec![T::zero(); space.n_x()];
    let records: Vec<DriftRecord<T>> = controls
        .par_iter()
        .enumerate()
        .map(|(index, u)| {
            let weak = weak_norm_sq(u);
            let control_l2 = u.l2_norm();
            match solve_burgers(eps, u, &zero, space).and_then(|run| project(&rho, run.final_state(), &space)) {
                Ok(p) => DriftRecord {
                    index,
                    control_l2,
                    projection: Some(p),
                    weak_norm: weak,
                    ratio: if weak > T::zero() { Some(p / (eps.sqrt() * weak)) } else { None },
                    failure: None,
                },
                Err(e) => DriftRecord { index, control_l2, projection: None, weak_norm: weak, ratio: None, failure: Some(e.to_string()) },
            }
        })
        .collect();
    let k2 = records.iter().filter_map(|r| r.ratio).fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.min(v))));
    Ok(DriftReport { eps, records, k2 })
}

/// `|y|_2 + |y_xx|_2` from the sine coefficients.
pub fn h2_surrogate<T: Real>(y: &[T], space: &SpaceGrid<T>) -> Result<T> {
    let basis = SineBasis::new(*space);
    let c = basis.analyze(y, space.n_x())?.coeffs;
    let pi2 = T::PI() * T::PI();
    let l2 = c.iter().map(|&v| v * v).sum::<T>().sqrt();
    let d2 = c
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let n = T::from_usize_lossy(k + 1);
            let w = n * n * pi2 * v;
            w * w
        })
        .sum::<T>()
        .sqrt();
    Ok(l2 + d2)
}

/// `|<mu, y(T)> - <mu, y0>|` for the uncontrolled unit-viscosity flow.
pub fn persistence_check<T: Real>(horizon: T, y0: &[T], mu: &[T], space: SpaceGrid<T>, n_t: usize) -> Result<T> {
    if h2_surrogate(y0, &space)? > T::one() + T::lit(1e-12) {
        return Err(Error::invalid("y0", "initial datum exceeds the unit second-order norm"));
    }
    let time = TimeGrid::new(n_t, horizon)?;
    let run = solve_burgers(T::one(), &Control::zero(time), y0, space)?;
    Ok((project(mu, run.final_state(), &space)? - project(mu, y0, &space)?).abs())
}

/// Deviations over a sweep of horizons and their log-log slope.
pub fn persistence_sweep<T: Real>(horizons: &[T], y0: &[T], mu: &[T], space: SpaceGrid<T>, n_t: usize) -> Result<(Vec<T>, T)> {
    let dev = horizons.iter().map(|&t| persistence_check(t, y0, mu, space, n_t)).collect::<Result<Vec<T>>>()?;
    let slope = loglog_slope(horizons, &dev)?;
    Ok((dev, slope))
}

/// One control of the final decomposition `y = y_free + y_u + z`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionRecord<T> {
    pub control_l2: T,
    pub weak_norm: T,
    /// `<rho, y(T)>`.
    pub projection: T,
    /// `<rho, y_free(T)>`, the uncontrolled flow from `delta rho`.
    pub free_projection: T,
    /// `<rho, y_u(T)>`, the controlled flow from rest.
    pub control_projection: T,
    /// `<rho, z(T)>`.
    pub coupling_projection: T,
    pub coupling_time_derivative_l2: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FinalReport<T> {
    pub delta: T,
    pub horizon: T,
    /// `|rho|_2^2` on the grid.
    pub rho_norm_sq: T,
    pub records: Vec<DecompositionRecord<T>>,
    /// Smallest `C >= 0` with `<rho, y(T)> >= delta |rho|^2 + k2 R(U) - C sqrt(T) delta (1 + |u|)`.
    pub fitted_c: T,
}

impl<T: Real> FinalReport<T> {
    pub fn all_positive(&self) -> bool {
        self.records.iter().all(|r| r.projection > T::zero())
    }
}

/// Three solves per control from `y0 = delta rho` with unit viscosity.
pub fn decomposition_run<T: Real>(delta: T, eta: T, k2: T, controls: &[Control<T>], space: SpaceGrid<T>) -> Result<FinalReport<T>> {
    let first = controls.first().ok_or_else(|| Error::invalid("controls", "at least one control required"))?;
    let time = *first.grid();
    let horizon = time.horizon();
    let rho = rho_samples(&space);
    let y0: Vec<T> = rho.iter().map(|&r| delta * r).collect();
    let zero = vec![T::zero(); space.n_x()];
    let free = solve_burgers(T::one(), &Control::zero(time), &y0, space)?;
    let free_projection = project(&rho, free.final_state(), &space)?;
    let rho_norm_sq = project(&rho, &rho, &space)?;
    let records = controls
        .par_iter()
        .map(|u| -> Result<DecompositionRecord<T>> {
            if u.grid() != &time {
                return Err(Error::invalid("controls", "all controls must share one grid"));
            }
            let control_l2 = u.l2_norm();
            if control_l2 > eta * (T::one() + T::lit(1e-12)) {
                return Err(Error::invalid("controls", "control exceeds the budget"));
            }
            let full = solve_burgers(T::one(), u, &y0, space)?;
            let only = solve_burgers(T::one(), u, &zero, space)?;
            let z = full.trajectory.sub(&free.trajectory)?.sub(&only.trajectory)?;
            Ok(DecompositionRecord {
                control_l2,
                weak_norm: weak_norm_sq(u),
                projection: project(&rho, full.final_state(), &space)?,
                free_projection,
                control_projection: project(&rho, only.final_state(), &space)?,
                coupling_projection: project(&rho, z.last(), &space)?,
                coupling_time_derivative_l2: z.time_derivative_l2(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fitted_c = records.iter().fold(T::zero(), |c, r| {
        let gap = delta * rho_norm_sq + k2 * r.weak_norm - r.projection;
        let scale = horizon.sqrt() * delta * (T::one() + r.control_l2);
        if scale > T::zero() {
            c.max(gap / scale)
        } else {
            c
        }
    });
    Ok(FinalReport { delta, horizon, rho_norm_sq, records, fitted_c })
}
